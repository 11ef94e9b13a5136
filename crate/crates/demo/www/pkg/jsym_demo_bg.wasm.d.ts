/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const convergence_history: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const emergent_orthogonality: (a: number, b: number, c: number) => [number, number, number, number];
export const tek_low_modes: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
