// Trailing-edge debouncer for per-keystroke evaluation requests.

export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(private delayMs: number) {}

  schedule(action: () => void): void {
    this.cancel();
    this.timer = setTimeout(() => {
      this.timer = null;
      action();
    }, this.delayMs);
  }

  /** Run a pending action immediately (used before submit). */
  flush(action: () => void): void {
    this.cancel();
    action();
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }
}
