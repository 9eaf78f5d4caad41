/* tslint:disable */
/* eslint-disable */

/**
 * `Φ(s)` and `Φ'(s)` along the first eigenfunction with the bound `s_φ`.
 */
export class PhiCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    dphi(): Float64Array;
    phi(): Float64Array;
    s(): Float64Array;
    /**
     * `NaN` when `κ ≥ κ_c`.
     */
    readonly bound: number;
}

/**
 * Samples of `W`, `W̃` and their derivatives on `[-u_max, u_max]`.
 */
export class PotentialCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    u(): Float64Array;
    /**
     * `NaN` where `|u| > 1`.
     */
    w(): Float64Array;
    w_mod(): Float64Array;
    readonly order: number;
    readonly u_hat: number;
    readonly u_theta: number;
}

/**
 * A forward-Euler run at the largest stable step (times a safety factor).
 */
export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Advances `steps` steps and returns the last flow residual.
     */
    advance(steps: number): number;
    classification(): string;
    energy(): number;
    constructor(theta: number, kappa: number, cells: number, seed: number);
    /**
     * RGBA pixels, one per node, `u ∈ [-1, 1]` on a blue-white-red ramp.
     */
    rgba(): Uint8Array;
    readonly dt: number;
    readonly max_u: number;
    readonly residual: number;
    readonly side: number;
    readonly time: number;
}

export function phi_scan_eigenfunction(theta: number, kappa: number, s_max: number, points: number): PhiCurve;

export function potential_curve(theta: number, c: number, u_max: number, points: number): PotentialCurve;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_phicurve_free: (a: number, b: number) => void;
    readonly __wbg_potentialcurve_free: (a: number, b: number) => void;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly phi_scan_eigenfunction: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly phicurve_bound: (a: number) => number;
    readonly phicurve_dphi: (a: number) => [number, number];
    readonly phicurve_phi: (a: number) => [number, number];
    readonly phicurve_s: (a: number) => [number, number];
    readonly potential_curve: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly potentialcurve_order: (a: number) => number;
    readonly potentialcurve_u: (a: number) => [number, number];
    readonly potentialcurve_u_hat: (a: number) => number;
    readonly potentialcurve_u_theta: (a: number) => number;
    readonly potentialcurve_w: (a: number) => [number, number];
    readonly potentialcurve_w_mod: (a: number) => [number, number];
    readonly simulation_advance: (a: number, b: number) => [number, number, number];
    readonly simulation_classification: (a: number) => [number, number];
    readonly simulation_dt: (a: number) => number;
    readonly simulation_energy: (a: number) => [number, number, number];
    readonly simulation_max_u: (a: number) => number;
    readonly simulation_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly simulation_residual: (a: number) => number;
    readonly simulation_rgba: (a: number) => [number, number];
    readonly simulation_side: (a: number) => number;
    readonly simulation_time: (a: number) => number;
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
