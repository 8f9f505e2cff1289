/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const bond_sample: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const cardy_curve: (a: number, b: number, c: number) => [number, number, number, number];
export const cardy_vs_simulation: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const g_profiles: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
