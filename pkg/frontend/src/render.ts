// Pure HTML renderers. Each function takes service JSON and returns markup;
// keeping them DOM-free makes the display-precision contract directly
// testable. Formatting helpers define the single display precision used
// everywhere, so a snapshot of the markup pins every rendered figure to the
// service value it came from.

import type {
  EvaluateResponse,
  Factor,
  ScenarioResult,
  SensitivityRow,
} from './types'
import type { BadgeState } from './session'

export const fmtWeight = (w: number): string => w.toFixed(3)
export const fmtCr = (cr: number): string => cr.toFixed(4)
export const fmtArea = (km2: number): string => km2.toFixed(2)
export const fmtPct = (pct: number): string => pct.toFixed(2)
export const fmtEnergy = (twh: number): string => twh.toFixed(3)
export const fmtDelta = (pct: number | null): string =>
  pct === null ? 'n/a' : `${pct >= 0 ? '+' : ''}${pct.toFixed(2)}%`

const escapeHtml = (s: string): string =>
  s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')

export const renderCrBadge = (state: BadgeState, evaluation: EvaluateResponse | null): string => {
  if (state === 'pending' || evaluation === null) {
    return '<span class="cr-badge pending">CR —</span>'
  }
  return `<span class="cr-badge ${state}">CR ${fmtCr(evaluation.cr)}</span>`
}

export const renderWeightsChart = (
  factors: readonly Factor[],
  evaluation: EvaluateResponse,
): string => {
  const rows = factors.map((factor, i) => {
    const w = evaluation.weights[i] ?? 0
    const width = Math.round(w * 1000) / 10
    return (
      `<div class="weight-row" data-factor="${factor.id}">` +
      `<span class="weight-label">${escapeHtml(factor.name)}</span>` +
      `<span class="weight-bar" style="width:${width}%"></span>` +
      `<span class="weight-value">${fmtWeight(w)}</span>` +
      `</div>`
    )
  })
  return `<div class="weights-chart">${rows.join('')}</div>`
}

export const renderRunButton = (enabled: boolean): string =>
  `<button class="run-button" ${enabled ? '' : 'disabled '}data-enabled="${enabled}">Run scenario</button>`

export const renderAreaTable = (result: ScenarioResult): string => {
  const body = Object.entries(result.classes)
    .sort(([a], [b]) => Number(a) - Number(b))
    .map(
      ([cls, c]) =>
        `<tr data-class="${cls}">` +
        `<td>${escapeHtml(c.label)}</td>` +
        `<td>${fmtArea(c.full_km2)}</td>` +
        `<td>${fmtPct(c.full_pct)}</td>` +
        `<td>${fmtArea(c.exploitable_km2)}</td>` +
        `<td>${fmtPct(c.exploitable_pct)}</td>` +
        `<td>${fmtEnergy(c.gp_full_twh)}</td>` +
        `<td>${fmtEnergy(c.gp_exploitable_twh)}</td>` +
        `</tr>`,
    )
    .join('')
  const capacity =
    result.capacity_mw_per_km2 === null
      ? ''
      : `<p class="capacity">Best-class capacity density: ${fmtArea(result.capacity_mw_per_km2)} MW/km²</p>`
  return (
    '<table class="area-table"><thead><tr>' +
    '<th>Class</th><th>Full km²</th><th>Full %</th>' +
    '<th>Exploitable km²</th><th>Exploitable %</th>' +
    '<th>GP full TWh/yr</th><th>GP exploitable TWh/yr</th>' +
    `</tr></thead><tbody>${body}</tbody></table>` +
    `<p class="totals">Total ${fmtArea(result.total_km2)} km², ` +
    `exploitable ${fmtArea(result.total_exploitable_km2)} km²</p>` +
    capacity
  )
}

export const renderSensitivityTable = (rows: SensitivityRow[]): string => {
  const classIds = rows.length > 0 ? Object.keys(rows[0]!.delta_pct).sort() : []
  const head = classIds.map((c) => `<th>ΔS class ${c}</th>`).join('')
  const body = rows
    .map(
      (row) =>
        `<tr data-excluded="${row.excluded}"><td>${escapeHtml(row.excluded)}</td>` +
        classIds.map((c) => `<td>${fmtDelta(row.delta_pct[c] ?? null)}</td>`).join('') +
        '</tr>',
    )
    .join('')
  return (
    `<table class="sensitivity-table"><thead><tr><th>Excluded</th>${head}</tr></thead>` +
    `<tbody>${body}</tbody></table>`
  )
}

export const renderMap = (mapUrl: string): string =>
  `<img class="class-map" src="${mapUrl}" alt="suitability class map" />`

/** Side-by-side comparison of two finished runs. */
export const renderComparison = (
  left: { name: string; result: ScenarioResult },
  right: { name: string; result: ScenarioResult },
): string =>
  '<div class="comparison">' +
  `<section><h3>${escapeHtml(left.name)}</h3>${renderAreaTable(left.result)}</section>` +
  `<section><h3>${escapeHtml(right.name)}</h3>${renderAreaTable(right.result)}</section>` +
  '</div>'
