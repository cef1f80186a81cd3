// Thin typed client for the suitability service. Evaluate requests are
// latest-wins: a new call aborts the one still in flight, so a fast series
// of judgment edits can never apply responses out of order.

import type {
  EvaluateResponse,
  MatrixEntry,
  ScenarioStatus,
  SensitivityResponse,
} from './types'

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`service responded ${status}: ${JSON.stringify(detail)}`)
  }
}

export class ApiClient {
  private evaluateController: AbortController | null = null

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
      signal,
    })
    const payload = await response.json()
    if (!response.ok) {
      throw new ServiceError(response.status, (payload as { detail?: unknown }).detail ?? payload)
    }
    return payload as T
  }

  /** Evaluate a judgment matrix; supersedes any evaluate call still pending. */
  async evaluate(matrix: MatrixEntry[][]): Promise<EvaluateResponse> {
    this.evaluateController?.abort()
    const controller = new AbortController()
    this.evaluateController = controller
    return this.request<EvaluateResponse>(
      'POST',
      '/api/ahp/evaluate',
      matrix,
      controller.signal,
    )
  }

  async createScenario(config: unknown): Promise<string> {
    const body = await this.request<{ id: string }>('POST', '/api/scenarios', config)
    return body.id
  }

  async runScenario(id: string): Promise<void> {
    await this.request('POST', `/api/scenarios/${id}/run`)
  }

  async getScenario(id: string): Promise<ScenarioStatus> {
    return this.request<ScenarioStatus>('GET', `/api/scenarios/${id}`)
  }

  async getSensitivity(id: string): Promise<SensitivityResponse> {
    return this.request<SensitivityResponse>('GET', `/api/scenarios/${id}/sensitivity`)
  }

  mapUrl(id: string): string {
    return `${this.baseUrl}/api/scenarios/${id}/map`
  }

  /** Poll until the run leaves the running state. */
  async waitForResult(id: string, intervalMs = 250, timeoutMs = 120_000): Promise<ScenarioStatus> {
    const deadline = Date.now() + timeoutMs
    for (;;) {
      const status = await this.getScenario(id)
      if (status.status === 'done' || status.status === 'failed') return status
      if (Date.now() > deadline) throw new Error(`scenario ${id} timed out`)
      await new Promise((resolve) => setTimeout(resolve, intervalMs))
    }
  }
}
