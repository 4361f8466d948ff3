// Minimal OBJ parser for the viewer: vertex positions with optional
// per-vertex colors, normals, and triangulated faces.

export interface ParsedMesh {
  positions: Float64Array; // 3 per vertex
  colors: Float64Array;    // 3 per vertex, defaults to white
  normals: Float64Array | null;
  triangles: Uint32Array;  // 3 indices per face
}

export function parseObj(text: string): ParsedMesh {
  const positions: number[] = [];
  const colors: number[] = [];
  const normalList: number[] = [];
  const normalRefs: Array<[number, number]> = [];
  const triangles: number[] = [];

  const lines = text.split("\n");
  for (let lineNo = 1; lineNo <= lines.length; lineNo++) {
    const line = lines[lineNo - 1].trim();
    if (line === "" || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    const keyword = parts[0];
    if (keyword === "v") {
      const vals = parts.slice(1).map(Number);
      if (vals.some(Number.isNaN) || (vals.length !== 3 && vals.length !== 6)) {
        throw new Error(`line ${lineNo}: vertex needs 3 or 6 numbers`);
      }
      positions.push(vals[0], vals[1], vals[2]);
      if (vals.length === 6) colors.push(vals[3], vals[4], vals[5]);
      else colors.push(1, 1, 1);
    } else if (keyword === "vn") {
      const vals = parts.slice(1).map(Number);
      if (vals.length !== 3 || vals.some(Number.isNaN)) {
        throw new Error(`line ${lineNo}: normal needs 3 numbers`);
      }
      normalList.push(vals[0], vals[1], vals[2]);
    } else if (keyword === "f") {
      const refs = parts.slice(1).map((token) => {
        const fields = token.split("/");
        const v = Number(fields[0]);
        const vn = fields.length === 3 && fields[2] !== "" ? Number(fields[2]) : null;
        if (!Number.isInteger(v) || (vn !== null && !Number.isInteger(vn))) {
          throw new Error(`line ${lineNo}: bad face reference '${token}'`);
        }
        return { v, vn };
      });
      if (refs.length < 3) throw new Error(`line ${lineNo}: face needs >= 3 vertices`);
      const vertexCount = positions.length / 3;
      for (const { v, vn } of refs) {
        if (v < 1 || v > vertexCount) {
          throw new Error(`line ${lineNo}: vertex index ${v} out of range`);
        }
        if (vn !== null) {
          if (vn < 1 || vn > normalList.length / 3) {
            throw new Error(`line ${lineNo}: normal index ${vn} out of range`);
          }
          normalRefs.push([v - 1, vn - 1]);
        }
      }
      for (let k = 1; k < refs.length - 1; k++) {
        triangles.push(refs[0].v - 1, refs[k].v - 1, refs[k + 1].v - 1);
      }
    }
    // other keywords ignored (mtllib, usemtl, o, g, s, vt)
  }

  let normals: Float64Array | null = null;
  if (normalRefs.length > 0) {
    normals = new Float64Array(positions.length);
    for (const [v, n] of normalRefs) {
      normals[3 * v] = normalList[3 * n];
      normals[3 * v + 1] = normalList[3 * n + 1];
      normals[3 * v + 2] = normalList[3 * n + 2];
    }
  }
  return {
    positions: new Float64Array(positions),
    colors: new Float64Array(colors),
    normals,
    triangles: new Uint32Array(triangles),
  };
}
