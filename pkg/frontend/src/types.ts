// Service JSON shapes. Every number the UI displays comes from one of these
// responses; the client never computes weights or consistency itself.

export interface Factor {
  id: string
  name: string
}

/** Fixed factor list, in matrix order. */
export const FACTORS: readonly Factor[] = [
  { id: 'GHI', name: 'Solar irradiation' },
  { id: 'T', name: 'Air temperature' },
  { id: 'H', name: 'Relative humidity' },
  { id: 'DEM', name: 'Elevation' },
  { id: 'S', name: 'Slope' },
  { id: 'Az', name: 'Aspect' },
  { id: 'Gp', name: 'Grid proximity' },
  { id: 'Rp', name: 'Road proximity' },
  { id: 'Sp', name: 'Settlement proximity' },
] as const

/** One upper-triangle judgment: which side of the pair dominates, and how strongly (1..9). */
export interface Judgment {
  row: number
  col: number
  grade: number
  direction: 'row' | 'col'
}

export type MatrixEntry = number | string

export interface EvaluateResponse {
  weights: number[]
  lambda_max: number
  ci: number
  ri: number
  cr: number
  consistent: boolean
}

export interface ClassSummary {
  label: string
  full_km2: number
  exploitable_km2: number
  full_pct: number
  exploitable_pct: number
  gp_full_twh: number
  gp_exploitable_twh: number
}

export interface ScenarioResult {
  total_km2: number
  total_exploitable_km2: number
  classes: Record<string, ClassSummary>
  capacity_mw_per_km2: number | null
}

export interface ScenarioStatus {
  id: string
  status: 'draft' | 'running' | 'done' | 'failed'
  error?: string
  result?: ScenarioResult
}

export interface SensitivityRow {
  excluded: string
  delta_pct: Record<string, number | null>
}

export interface SensitivityResponse {
  rows: SensitivityRow[]
}
