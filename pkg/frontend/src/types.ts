/** Wire types for the pricing service, mirrored from its documented JSON shapes. */

export interface EltSummary {
  index: number;
  record_count: number;
}

export interface SessionSummary {
  session_id: string;
  trial_count: number;
  catalog_size: number;
  elt_count: number;
  elts: EltSummary[];
  table_bytes: number;
  created_at: number;
  reprice_count: number;
}

/** null means unlimited on the two limit fields; retentions are always numbers. */
export interface LayerTermsWire {
  occ_retention: number;
  occ_limit: number | null;
  agg_retention: number;
  agg_limit: number | null;
}

export interface PricingRequest {
  terms: LayerTermsWire;
  elt_selection: number[];
  return_periods: number[];
}

export interface MetricRow {
  return_period: number;
  pml: number;
  tvar: number;
}

export interface EpPoint {
  loss: number;
  exceedance_probability: number;
}

export interface PricingResponse {
  session_id: string;
  trial_count: number;
  metrics: MetricRow[];
  ep_curve: EpPoint[];
  trial_mean: number;
  trial_max: number;
  lookups: number;
  engine_seconds: number;
}

export interface SessionSpec {
  seed: number;
  catalog_size: number;
  trial_count: number;
  events_per_trial_range: [number, number];
  elt_count: number;
  elt_size_range: [number, number];
  loss_scale: number;
}
