/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_anchorview_free: (a: number, b: number) => void;
export const __wbg_demotrainer_free: (a: number, b: number) => void;
export const __wbg_volume_free: (a: number, b: number) => void;
export const anchorview_fallback: (a: number) => number;
export const anchorview_from_hard: (a: number) => number;
export const anchorview_from_pool: (a: number) => number;
export const anchorview_hard_count: (a: number) => number;
export const anchorview_pool_size: (a: number) => number;
export const anchorview_slice_count: (a: number, b: number) => number;
export const anchorview_slice_rgba: (a: number, b: number) => [number, number, number, number];
export const demotrainer_depth: (a: number) => number;
export const demotrainer_finished: (a: number) => number;
export const demotrainer_height: (a: number) => number;
export const demotrainer_iteration: (a: number) => bigint;
export const demotrainer_new: (a: bigint, b: number, c: number, d: number, e: number) => [number, number, number];
export const demotrainer_parameter_count: (a: number) => number;
export const demotrainer_prediction_rgba: (a: number, b: number) => [number, number, number, number];
export const demotrainer_sample_anchors: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const demotrainer_step: (a: number) => [number, number, number, number];
export const demotrainer_total_iterations: (a: number) => bigint;
export const demotrainer_validation_f1: (a: number) => [number, number, number];
export const demotrainer_width: (a: number) => number;
export const momentum_curve: (a: bigint, b: number, c: number) => [number, number, number, number];
export const volume_depth: (a: number) => number;
export const volume_foreground_fraction: (a: number) => number;
export const volume_generate: (a: bigint, b: number, c: number) => [number, number, number];
export const volume_height: (a: number) => number;
export const volume_slice_rgba: (a: number, b: number, c: number) => [number, number, number, number];
export const volume_width: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
