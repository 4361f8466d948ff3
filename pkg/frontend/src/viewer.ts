// Software mesh viewer: orbit/zoom camera, painter-sorted flat-shaded
// triangles with vertex colors. Projection is pure math (testable headless);
// only drawFrame touches a canvas context.

import { ParsedMesh } from "./objparse.js";

export interface Camera {
  yaw: number;    // radians around +y
  pitch: number;  // radians, clamped short of the poles
  distance: number;
}

export interface ScreenTriangle {
  xs: [number, number, number];
  ys: [number, number, number];
  depth: number;
  fill: string;
}

export function defaultCamera(): Camera {
  return { yaw: 0.6, pitch: 0.4, distance: 2.6 };
}

export function orbit(camera: Camera, dYaw: number, dPitch: number): Camera {
  const limit = Math.PI / 2 - 0.05;
  return {
    yaw: camera.yaw + dYaw,
    pitch: Math.min(limit, Math.max(-limit, camera.pitch + dPitch)),
    distance: camera.distance,
  };
}

export function zoom(camera: Camera, factor: number): Camera {
  return { ...camera, distance: Math.min(20, Math.max(0.5, camera.distance * factor)) };
}

function rotate(p: [number, number, number], camera: Camera): [number, number, number] {
  const [x, y, z] = p;
  const cy = Math.cos(camera.yaw);
  const sy = Math.sin(camera.yaw);
  const cp = Math.cos(camera.pitch);
  const sp = Math.sin(camera.pitch);
  const x1 = cy * x + sy * z;
  const z1 = -sy * x + cy * z;
  const y2 = cp * y - sp * z1;
  const z2 = sp * y + cp * z1;
  return [x1, y2, z2];
}

/** Project to screen space and painter-sort back to front. */
export function projectMesh(mesh: ParsedMesh, camera: Camera,
                            width: number, height: number): ScreenTriangle[] {
  const fov = 1.1;
  const focal = (0.5 * Math.min(width, height)) / Math.tan(fov / 2);
  const tris: ScreenTriangle[] = [];
  const t = mesh.triangles;
  const light: [number, number, number] = [0.4, 0.7, 0.59];

  for (let i = 0; i < t.length; i += 3) {
    const xs: number[] = [];
    const ys: number[] = [];
    let depth = 0;
    const cam: Array<[number, number, number]> = [];
    let r = 0;
    let g = 0;
    let b = 0;
    let behind = false;
    for (let k = 0; k < 3; k++) {
      const vi = t[i + k];
      const world: [number, number, number] = [
        mesh.positions[3 * vi], mesh.positions[3 * vi + 1], mesh.positions[3 * vi + 2]];
      const [cx, cyy, cz] = rotate(world, camera);
      const zc = camera.distance - cz;  // camera looks down -z after rotation
      if (zc <= 0.01) behind = true;
      cam.push([cx, cyy, zc]);
      xs.push(width / 2 + (focal * cx) / zc);
      ys.push(height / 2 - (focal * cyy) / zc);
      depth += zc / 3;
      r += mesh.colors[3 * vi] / 3;
      g += mesh.colors[3 * vi + 1] / 3;
      b += mesh.colors[3 * vi + 2] / 3;
    }
    if (behind) continue;
    const ux = cam[1][0] - cam[0][0];
    const uy = cam[1][1] - cam[0][1];
    const uz = cam[1][2] - cam[0][2];
    const vx = cam[2][0] - cam[0][0];
    const vy = cam[2][1] - cam[0][1];
    const vz = cam[2][2] - cam[0][2];
    const nx = uy * vz - uz * vy;
    const ny = uz * vx - ux * vz;
    const nz = ux * vy - uy * vx;
    const len = Math.hypot(nx, ny, nz) || 1;
    const lambert = Math.abs(
      (nx * light[0] + ny * light[1] + nz * light[2]) / len);
    const shade = 0.35 + 0.65 * lambert;
    const fill = `rgb(${Math.round(255 * r * shade)},` +
      `${Math.round(255 * g * shade)},${Math.round(255 * b * shade)})`;
    tris.push({
      xs: xs as [number, number, number],
      ys: ys as [number, number, number],
      depth,
      fill,
    });
  }
  tris.sort((a, b2) => b2.depth - a.depth);
  return tris;
}

export function drawFrame(ctx: CanvasRenderingContext2D, mesh: ParsedMesh,
                          camera: Camera, width: number, height: number): void {
  ctx.fillStyle = "#13151a";
  ctx.fillRect(0, 0, width, height);
  for (const tri of projectMesh(mesh, camera, width, height)) {
    ctx.beginPath();
    ctx.moveTo(tri.xs[0], tri.ys[0]);
    ctx.lineTo(tri.xs[1], tri.ys[1]);
    ctx.lineTo(tri.xs[2], tri.ys[2]);
    ctx.closePath();
    ctx.fillStyle = tri.fill;
    ctx.fill();
  }
}
