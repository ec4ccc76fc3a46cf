/**
 * Single serialized event queue. Every state mutation in the app goes
 * through one of these, so handlers never interleave even when they await.
 */
export class EventQueue {
  private tail: Promise<void> = Promise.resolve();
  private depth = 0;

  /** Number of tasks queued or running right now. */
  get pending(): number {
    return this.depth;
  }

  enqueue(task: () => void | Promise<void>): Promise<void> {
    this.depth += 1;
    const next = this.tail.then(async () => {
      try {
        await task();
      } finally {
        this.depth -= 1;
      }
    });
    // keep the chain alive after a task throws
    this.tail = next.catch(() => undefined);
    return next;
  }

  /** Resolves once everything queued so far has finished. */
  idle(): Promise<void> {
    return this.tail;
  }
}
