/* tslint:disable */
/* eslint-disable */

/**
 * Candidate bins and their curvature priors.
 */
export class Detection {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly bins: Uint32Array;
    readonly mus: Float64Array;
    readonly priors: Float64Array;
}

/**
 * Outcome of one fit.
 */
export class Enhancement {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly amps: Float64Array;
    /**
     * Recalibrated enhanced spectrum.
     */
    readonly enhanced: Float64Array;
    readonly loss_trace: Float64Array;
    readonly mus: Float64Array;
    readonly pseudo: Float64Array;
    readonly recal_scale: number;
}

/**
 * One synthetic ground truth with its two simulated predictions.
 */
export class Sample {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly energies: Float64Array;
    readonly gt: Float64Array;
    readonly p1: Float64Array;
    readonly p3: Float64Array;
}

/**
 * Cosine distance, for the metric readout.
 */
export function cosine(a: Float64Array, b: Float64Array): number;

export function detect(p1: Float64Array, hessian_sigma: number): Detection;

export function enhance_spectrum(p3: Float64Array, p1: Float64Array, lambda_reg: number, steps: number): Enhancement;

export function synth_sample(seed: number, n_points: number, attenuation: number, noise: number): Sample;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_detection_free: (a: number, b: number) => void;
    readonly __wbg_enhancement_free: (a: number, b: number) => void;
    readonly __wbg_sample_free: (a: number, b: number) => void;
    readonly cosine: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly detect: (a: number, b: number, c: number) => [number, number, number];
    readonly detection_bins: (a: number) => [number, number];
    readonly detection_mus: (a: number) => [number, number];
    readonly detection_priors: (a: number) => [number, number];
    readonly enhance_spectrum: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly enhancement_amps: (a: number) => [number, number];
    readonly enhancement_enhanced: (a: number) => [number, number];
    readonly enhancement_loss_trace: (a: number) => [number, number];
    readonly enhancement_mus: (a: number) => [number, number];
    readonly enhancement_pseudo: (a: number) => [number, number];
    readonly enhancement_recal_scale: (a: number) => number;
    readonly sample_energies: (a: number) => [number, number];
    readonly sample_gt: (a: number) => [number, number];
    readonly sample_p1: (a: number) => [number, number];
    readonly sample_p3: (a: number) => [number, number];
    readonly synth_sample: (a: number, b: number, c: number, d: number) => [number, number, number];
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
