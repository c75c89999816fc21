/**
 * Thin client for the engine's JSON API. Every verdict shown in the UI is
 * the verbatim service response; requests carry a sequence number so a
 * slow answer can never overwrite a newer one.
 */

import type { ApiError } from "./types.js";

export class ApiRequestError extends Error {
  constructor(public readonly detail: ApiError) {
    super(detail.message);
  }
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  async post<T>(action: string, params: unknown): Promise<T> {
    const resp = await fetch(`${this.base}/api/${action}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params),
    });
    const body = await resp.json();
    if (!body.ok) throw new ApiRequestError(body.error as ApiError);
    return body.result as T;
  }

  async health(): Promise<boolean> {
    try {
      const resp = await fetch(`${this.base}/api/health`);
      return (await resp.json()).ok === true;
    } catch {
      return false;
    }
  }
}

/**
 * Wrap an async producer so that only the most recently started call may
 * deliver; stale resolutions are dropped silently.
 */
export function latestOnly<A extends unknown[], R>(
  run: (...args: A) => Promise<R>,
  deliver: (result: R) => void,
  fail: (err: unknown) => void = () => undefined,
): (...args: A) => void {
  let seq = 0;
  return (...args: A) => {
    const ticket = ++seq;
    run(...args).then(
      (result) => {
        if (ticket === seq) deliver(result);
      },
      (err) => {
        if (ticket === seq) fail(err);
      },
    );
  };
}

export function debounce<A extends unknown[]>(fn: (...args: A) => void, ms: number): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), ms);
  };
}
