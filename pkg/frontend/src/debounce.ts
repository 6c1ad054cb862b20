/**
 * Trailing-edge debouncer: a burst of calls collapses into one invocation
 * ``delayMs`` after the burst ends. Used so drag interactions trigger
 * exactly one recompute request instead of one per mousemove.
 */
export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  cancel(): void;
  /** pending call scheduled and not yet fired */
  pending(): boolean;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs: number,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  const wrapped = (...args: A) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      fn(...args);
    }, delayMs);
  };
  wrapped.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
  };
  wrapped.pending = () => timer !== null;
  return wrapped;
}
