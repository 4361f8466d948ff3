// Browser speech recognition for prompt dictation, with typed input always
// available as the fallback path.

interface RecognitionResultEvent {
  results: ArrayLike<ArrayLike<{ transcript: string }>>;
}

interface RecognitionLike {
  lang: string;
  continuous: boolean;
  interimResults: boolean;
  onresult: ((event: RecognitionResultEvent) => void) | null;
  onerror: ((event: { error: string }) => void) | null;
  onend: (() => void) | null;
  start(): void;
  stop(): void;
}

type RecognitionCtor = new () => RecognitionLike;

function recognitionCtor(): RecognitionCtor | null {
  const w = globalThis as Record<string, unknown>;
  return (w.SpeechRecognition as RecognitionCtor | undefined)
    ?? (w.webkitSpeechRecognition as RecognitionCtor | undefined)
    ?? null;
}

export function isSpeechSupported(): boolean {
  return recognitionCtor() !== null;
}

/**
 * Capture one utterance and resolve with its transcript. Rejects when
 * recognition is unavailable or errors; callers fall back to typed input.
 */
export function captureVoicePrompt(lang = "en-US"): Promise<string> {
  const Ctor = recognitionCtor();
  if (Ctor === null) {
    return Promise.reject(new Error("speech recognition unavailable"));
  }
  return new Promise<string>((resolve, reject) => {
    const recognition = new Ctor();
    recognition.lang = lang;
    recognition.continuous = false;
    recognition.interimResults = false;
    let transcript = "";
    recognition.onresult = (event) => {
      const last = event.results[event.results.length - 1];
      transcript = last[0].transcript;
    };
    recognition.onerror = (event) => reject(new Error(`speech error: ${event.error}`));
    recognition.onend = () => resolve(transcript.trim());
    recognition.start();
  });
}
