/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_initialdata_free: (a: number, b: number) => void;
export const cutoff_profile: (a: number, b: number, c: number) => [number, number, number, number];
export const initial_data: (a: number) => [number, number, number];
export const initialdata_fourier_l1: (a: number) => number;
export const initialdata_physical_pixels: (a: number) => [number, number];
export const initialdata_side: (a: number) => number;
export const initialdata_spectrum_pixels: (a: number) => [number, number];
export const initialdata_spectrum_side: (a: number) => number;
export const initialdata_theta_h3: (a: number) => number;
export const initialdata_theta_linf: (a: number) => number;
export const initialdata_u_linf: (a: number) => number;
export const linear_decay: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
