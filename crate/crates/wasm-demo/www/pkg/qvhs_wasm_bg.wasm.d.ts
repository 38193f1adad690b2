/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_detection_free: (a: number, b: number) => void;
export const __wbg_enhancement_free: (a: number, b: number) => void;
export const __wbg_sample_free: (a: number, b: number) => void;
export const cosine: (a: number, b: number, c: number, d: number) => [number, number, number];
export const detect: (a: number, b: number, c: number) => [number, number, number];
export const detection_bins: (a: number) => [number, number];
export const detection_mus: (a: number) => [number, number];
export const detection_priors: (a: number) => [number, number];
export const enhance_spectrum: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const enhancement_amps: (a: number) => [number, number];
export const enhancement_enhanced: (a: number) => [number, number];
export const enhancement_loss_trace: (a: number) => [number, number];
export const enhancement_mus: (a: number) => [number, number];
export const enhancement_pseudo: (a: number) => [number, number];
export const enhancement_recal_scale: (a: number) => number;
export const sample_energies: (a: number) => [number, number];
export const sample_gt: (a: number) => [number, number];
export const sample_p1: (a: number) => [number, number];
export const sample_p3: (a: number) => [number, number];
export const synth_sample: (a: number, b: number, c: number, d: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
