// Wire types for the win probability service. Field names and units match
// the service JSON exactly; the UI never reshapes them.

export type Possession = "H" | "A" | "N";

export interface WireGameState {
  schema_version: 1;
  time_elapsed_s: number;
  score_diff: number;
  possession: Possession;
  down: number;
  yards_to_go: number;
  field_position: number;
  home_timeouts: number;
  away_timeouts: number;
  home_possession_time_s: number;
  rating_diff: number;
}

export interface HealthResponse {
  status: string;
  model_type: string;
}

export interface WinprobResponse {
  p_home: number;
  model_type: string;
}

export interface WhatifVariant {
  p_home: number;
  delta: number;
}

export interface WhatifResponse {
  base_p_home: number;
  variants: WhatifVariant[];
  model_type: string;
}
