/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_phicurve_free: (a: number, b: number) => void;
export const __wbg_potentialcurve_free: (a: number, b: number) => void;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const phi_scan_eigenfunction: (a: number, b: number, c: number, d: number) => [number, number, number];
export const phicurve_bound: (a: number) => number;
export const phicurve_dphi: (a: number) => [number, number];
export const phicurve_phi: (a: number) => [number, number];
export const phicurve_s: (a: number) => [number, number];
export const potential_curve: (a: number, b: number, c: number, d: number) => [number, number, number];
export const potentialcurve_order: (a: number) => number;
export const potentialcurve_u: (a: number) => [number, number];
export const potentialcurve_u_hat: (a: number) => number;
export const potentialcurve_u_theta: (a: number) => number;
export const potentialcurve_w: (a: number) => [number, number];
export const potentialcurve_w_mod: (a: number) => [number, number];
export const simulation_advance: (a: number, b: number) => [number, number, number];
export const simulation_classification: (a: number) => [number, number];
export const simulation_dt: (a: number) => number;
export const simulation_energy: (a: number) => [number, number, number];
export const simulation_max_u: (a: number) => number;
export const simulation_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const simulation_residual: (a: number) => number;
export const simulation_rgba: (a: number) => [number, number];
export const simulation_side: (a: number) => number;
export const simulation_time: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
