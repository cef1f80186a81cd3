// Judgment session state: an upper-triangle set of pairwise judgments plus
// the most recent service evaluation. Reciprocity is structural — only the
// upper triangle is stored, and the lower triangle is always derived as the
// exact reciprocal when the matrix is built.

import type { EvaluateResponse, Factor, Judgment, MatrixEntry } from './types'
import { FACTORS } from './types'

export interface JudgmentSession {
  factors: readonly Factor[]
  judgments: Judgment[]
  lastEvaluation: EvaluateResponse | null
  scenarioId: string | null
}

export const newSession = (factors: readonly Factor[] = FACTORS): JudgmentSession => ({
  factors,
  judgments: [],
  lastEvaluation: null,
  scenarioId: null,
})

const pairKey = (row: number, col: number) => `${row}:${col}`

/** Record (or replace) one judgment. Pairs are normalized to the upper
 * triangle; editing (j, i) stores (i, j) with the direction flipped. */
export const editJudgment = (
  session: JudgmentSession,
  judgment: Judgment,
): JudgmentSession => {
  let { row, col, grade, direction } = judgment
  if (row === col || row < 0 || col < 0 ||
      row >= session.factors.length || col >= session.factors.length) {
    throw new Error(`invalid factor pair (${row}, ${col})`)
  }
  if (!Number.isInteger(grade) || grade < 1 || grade > 9) {
    throw new Error(`grade must be an integer 1..9, got ${grade}`)
  }
  if (row > col) {
    ;[row, col] = [col, row]
    direction = direction === 'row' ? 'col' : 'row'
  }
  const kept = session.judgments.filter((j) => pairKey(j.row, j.col) !== pairKey(row, col))
  kept.push({ row, col, grade, direction })
  // any edit invalidates the previous evaluation until the service answers
  return { ...session, judgments: kept, lastEvaluation: null }
}

/** Build the full reciprocal matrix for the service. Dominated entries are
 * sent as "1/g" fraction strings so the service sees exact reciprocals. */
export const buildMatrix = (session: JudgmentSession): MatrixEntry[][] => {
  const n = session.factors.length
  const m: MatrixEntry[][] = Array.from({ length: n }, (_, i) =>
    Array.from({ length: n }, (_, j) => (i === j ? 1 : 1)),
  )
  for (const { row, col, grade, direction } of session.judgments) {
    const upper: MatrixEntry = direction === 'row' ? grade : grade === 1 ? 1 : `1/${grade}`
    const lower: MatrixEntry = direction === 'row' ? (grade === 1 ? 1 : `1/${grade}`) : grade
    m[row]![col] = upper
    m[col]![row] = lower
  }
  return m
}

/** Entry shown at (i, j), lower triangle included (reciprocal rendering). */
export const displayEntry = (session: JudgmentSession, i: number, j: number): string => {
  if (i === j) return '1'
  const m = buildMatrix(session)
  return String(m[i]![j])
}

export const applyEvaluation = (
  session: JudgmentSession,
  response: EvaluateResponse,
): JudgmentSession => ({ ...session, lastEvaluation: response })

/** The run action is available only when the service has judged the current
 * matrix consistent. No client-side CR math ever feeds this gate. */
export const runEnabled = (session: JudgmentSession): boolean =>
  session.lastEvaluation !== null && session.lastEvaluation.consistent === true

export type BadgeState = 'green' | 'red' | 'pending'

export const crBadgeState = (session: JudgmentSession): BadgeState => {
  if (session.lastEvaluation === null) return 'pending'
  return session.lastEvaluation.consistent ? 'green' : 'red'
}
