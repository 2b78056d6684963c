/**
 * Returns a debounced wrapper that fires `fn` after `delay` ms of no calls.
 * Keeps the what-if explorer responsive without flooding the service while
 * a slider is being dragged.
 */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delay = 250,
): { (...args: A): void; cancel(): void } {
  let timer: ReturnType<typeof setTimeout> | null = null;

  const debounced = (...args: A) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      fn(...args);
    }, delay);
  };
  debounced.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
  };
  return debounced;
}
