// Browser wiring: binds the session, api client, and renderers to the DOM.
// All state transitions funnel through refresh() so the page is always a
// pure function of the session plus the latest service responses.

import { ApiClient, ServiceError } from './api'
import {
  applyEvaluation,
  buildMatrix,
  crBadgeState,
  editJudgment,
  newSession,
  runEnabled,
  type JudgmentSession,
} from './session'
import {
  renderAreaTable,
  renderCrBadge,
  renderMap,
  renderRunButton,
  renderSensitivityTable,
  renderWeightsChart,
} from './render'
import type { Judgment } from './types'

export interface AppOptions {
  baseUrl: string
  scenarioConfig: unknown
  root: HTMLElement
}

export class DecisionApp {
  private session: JudgmentSession = newSession()
  private readonly api: ApiClient

  constructor(private readonly options: AppOptions) {
    this.api = new ApiClient(options.baseUrl)
  }

  private el(selector: string): HTMLElement {
    const node = this.options.root.querySelector<HTMLElement>(selector)
    if (node === null) throw new Error(`missing element ${selector}`)
    return node
  }

  private refresh(): void {
    this.el('#cr-badge').innerHTML = renderCrBadge(
      crBadgeState(this.session),
      this.session.lastEvaluation,
    )
    this.el('#run-area').innerHTML = renderRunButton(runEnabled(this.session))
    if (this.session.lastEvaluation !== null) {
      this.el('#weights').innerHTML = renderWeightsChart(
        this.session.factors,
        this.session.lastEvaluation,
      )
    }
    const button = this.el('#run-area').querySelector('button')
    button?.addEventListener('click', () => void this.run())
  }

  async edit(judgment: Judgment): Promise<void> {
    this.session = editJudgment(this.session, judgment)
    this.refresh()
    try {
      const evaluation = await this.api.evaluate(buildMatrix(this.session))
      this.session = applyEvaluation(this.session, evaluation)
    } catch (error) {
      if (error instanceof DOMException && error.name === 'AbortError') return // superseded
      if (error instanceof ServiceError) {
        this.el('#errors').textContent = String(error.message)
        return
      }
      throw error
    }
    this.refresh()
  }

  async run(): Promise<void> {
    if (!runEnabled(this.session)) return
    const id =
      this.session.scenarioId ??
      (await this.api.createScenario(this.options.scenarioConfig))
    this.session = { ...this.session, scenarioId: id }
    await this.api.runScenario(id)
    const status = await this.api.waitForResult(id)
    if (status.status === 'failed') {
      this.el('#errors').textContent = status.error ?? 'run failed'
      return
    }
    if (status.result !== undefined) {
      this.el('#areas').innerHTML = renderAreaTable(status.result)
    }
    this.el('#map').innerHTML = renderMap(this.api.mapUrl(id))
    const sensitivity = await this.api.getSensitivity(id)
    this.el('#sensitivity').innerHTML = renderSensitivityTable(sensitivity.rows)
  }

  mount(): void {
    this.refresh()
  }
}
