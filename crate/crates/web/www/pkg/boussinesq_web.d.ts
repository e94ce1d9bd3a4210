/* tslint:disable */
/* eslint-disable */

export class InitialData {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    fourier_l1(): number;
    /**
     * RGBA pixels of `θ₀` on the whole box, origin centred.
     */
    physical_pixels(): Uint8Array;
    side(): number;
    /**
     * RGBA pixels of `|θ̂₀|` on `|ξ_i| ≤ 2`.
     */
    spectrum_pixels(): Uint8Array;
    spectrum_side(): number;
    theta_h3(): number;
    theta_linf(): number;
    u_linf(): number;
}

export function cutoff_profile(order: number, r_max: number, samples: number): Float64Array;

export function initial_data(epsilon: number): InitialData;

export function linear_decay(epsilon: number, nu: number, lambda: number, t_end: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_initialdata_free: (a: number, b: number) => void;
    readonly cutoff_profile: (a: number, b: number, c: number) => [number, number, number, number];
    readonly initial_data: (a: number) => [number, number, number];
    readonly initialdata_fourier_l1: (a: number) => number;
    readonly initialdata_physical_pixels: (a: number) => [number, number];
    readonly initialdata_side: (a: number) => number;
    readonly initialdata_spectrum_pixels: (a: number) => [number, number];
    readonly initialdata_spectrum_side: (a: number) => number;
    readonly initialdata_theta_h3: (a: number) => number;
    readonly initialdata_theta_linf: (a: number) => number;
    readonly initialdata_u_linf: (a: number) => number;
    readonly linear_decay: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
