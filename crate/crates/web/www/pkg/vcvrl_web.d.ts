/* tslint:disable */
/* eslint-disable */

/**
 * One anchor draw over a volume.
 */
export class AnchorView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    fallback(): boolean;
    from_hard(): number;
    from_pool(): number;
    hard_count(): number;
    pool_size(): number;
    /**
     * Anchors on slice `z` that fall in it.
     */
    slice_count(z: number): number;
    slice_rgba(z: number): Uint8Array;
}

/**
 * Small training run advanced one optimizer step at a time. Validation and
 * anchor views use the first validation volume.
 */
export class DemoTrainer {
    free(): void;
    [Symbol.dispose](): void;
    depth(): number;
    finished(): boolean;
    height(): number;
    iteration(): bigint;
    /**
     * `strategy` is `none` for the plain backbone, or `random`, `ph`,
     * `hybrid` for siamese training with that anchor strategy.
     */
    constructor(seed: bigint, strategy: string, anchors: number, iterations: number);
    parameter_count(): number;
    /**
     * Validation slice with true positives, false positives and false
     * negatives coloured.
     */
    prediction_rgba(z: number): Uint8Array;
    /**
     * Draw `n` anchors from the neuron pool of the validation volume, where
     * hard members are neuron voxels the current network misses.
     */
    sample_anchors(strategy: string, n: number, seed: bigint): AnchorView;
    /**
     * One optimizer step; returns the iteration record as JSON.
     */
    step(): string;
    total_iterations(): bigint;
    /**
     * F1 of the current network on the validation volume.
     */
    validation_f1(): number;
    width(): number;
}

/**
 * A generated volume with its ground-truth label.
 */
export class Volume {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    depth(): number;
    foreground_fraction(): number;
    static generate(seed: bigint, noise_sigma: number, branches: number): Volume;
    height(): number;
    /**
     * Intensities in gray, optionally with the label blended on top.
     */
    slice_rgba(z: number, show_label: boolean): Uint8Array;
    width(): number;
}

/**
 * Descriptor momentum coefficient at `points` evenly spaced iterations of a
 * `total`-iteration schedule.
 */
export function momentum_curve(total: bigint, base: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_anchorview_free: (a: number, b: number) => void;
    readonly __wbg_demotrainer_free: (a: number, b: number) => void;
    readonly __wbg_volume_free: (a: number, b: number) => void;
    readonly anchorview_fallback: (a: number) => number;
    readonly anchorview_from_hard: (a: number) => number;
    readonly anchorview_from_pool: (a: number) => number;
    readonly anchorview_hard_count: (a: number) => number;
    readonly anchorview_pool_size: (a: number) => number;
    readonly anchorview_slice_count: (a: number, b: number) => number;
    readonly anchorview_slice_rgba: (a: number, b: number) => [number, number, number, number];
    readonly demotrainer_depth: (a: number) => number;
    readonly demotrainer_finished: (a: number) => number;
    readonly demotrainer_height: (a: number) => number;
    readonly demotrainer_iteration: (a: number) => bigint;
    readonly demotrainer_new: (a: bigint, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly demotrainer_parameter_count: (a: number) => number;
    readonly demotrainer_prediction_rgba: (a: number, b: number) => [number, number, number, number];
    readonly demotrainer_sample_anchors: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly demotrainer_step: (a: number) => [number, number, number, number];
    readonly demotrainer_total_iterations: (a: number) => bigint;
    readonly demotrainer_validation_f1: (a: number) => [number, number, number];
    readonly demotrainer_width: (a: number) => number;
    readonly momentum_curve: (a: bigint, b: number, c: number) => [number, number, number, number];
    readonly volume_depth: (a: number) => number;
    readonly volume_foreground_fraction: (a: number) => number;
    readonly volume_generate: (a: bigint, b: number, c: number) => [number, number, number];
    readonly volume_height: (a: number) => number;
    readonly volume_slice_rgba: (a: number, b: number, c: number) => [number, number, number, number];
    readonly volume_width: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
