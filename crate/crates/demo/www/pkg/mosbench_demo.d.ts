/* tslint:disable */
/* eslint-disable */

/**
 * Largest-remainder clip counts for `n` clips over the given first-step
 * weights (one per row of [`first_step_rows`]).
 */
export function apportion_first_step(weights: Float64Array, n: number): Uint32Array;

/**
 * Magnitude response in dB of the sixth-order Butterworth filter at
 * `points` frequencies evenly spaced from 0 to Nyquist.
 */
export function filter_response(highpass: boolean, cutoff_hz: number, sample_rate: number, points: number): Float64Array;

/**
 * Tags of the first-step impairment rows, comma separated, in the order
 * expected by [`apportion_first_step`].
 */
export function first_step_rows(): string;

/**
 * Fits the monotone cubic mapping from predictions `y` to MOS `x`.
 *
 * Returns `[a, b, c, d, range_lo, range_hi, order, rmse, rmse_map, pcc]`
 * followed by `curve_points` (y, mapped y) pairs spanning the fit range.
 */
export function fit_mapping(x: Float64Array, y: Float64Array, curve_points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly apportion_first_step: (a: number, b: number, c: number) => [number, number, number, number];
    readonly filter_response: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly first_step_rows: () => [number, number];
    readonly fit_mapping: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
