/**
 * Single-focus audio playback.
 *
 * At most one stream is ever active: starting a new playback stops the
 * previous one first.  Replay and re-seek are unrestricted.  The playback
 * backend is injectable — the browser entry point uses an HTMLAudioElement,
 * tests substitute fakes or a real HTTP fetch.
 */

export interface Playback {
  /** Resolve once playback has successfully started; reject on failure. */
  start(): Promise<void>;
  stop(): void;
}

export type PlaybackFactory = (url: string) => Playback;

export class AudioFocus {
  private current: Playback | null = null;

  constructor(private readonly factory: PlaybackFactory) {}

  /**
   * Start playing `url`, stopping whatever was playing first.
   *
   * Resolves true when playback started and still holds the focus — the
   * caller may then count the stimulus as auditioned.  Resolves false when
   * another play request superseded this one while it was starting (not a
   * failure).  Rejects when the playback itself fails, leaving the focus
   * free so the user can simply try again.
   */
  async play(url: string): Promise<boolean> {
    this.stop();
    const playback = this.factory(url);
    this.current = playback;
    try {
      await playback.start();
    } catch (cause) {
      if (this.current !== playback) return false; // superseded mid-start
      this.current = null;
      throw cause;
    }
    return this.current === playback;
  }

  /** Stop the active stream, if any. */
  stop(): void {
    const playback = this.current;
    this.current = null;
    playback?.stop();
  }
}

/** Browser playback over an HTMLAudioElement streaming from the service. */
export function htmlAudioPlayback(url: string): Playback {
  const element = new Audio(url);
  element.preload = "auto";
  return {
    start: () => element.play(),
    stop: () => {
      element.pause();
      element.removeAttribute("src");
      element.load();
    },
  };
}
