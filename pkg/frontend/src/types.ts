// JSON shapes returned by the measurement service.

export type SideKey = "left" | "right";
export type View = "both" | "left_zoom" | "right_zoom";
export type Indicator = "idle" | "active";
export type SlotKey = "left" | "right";

export type Point = [number, number];

export interface Measurement {
  ccd_degrees: number;
  degenerate: boolean;
  neck_endpoints: [Point, Point];
  shaft_endpoints: [Point, Point];
}

export interface StudyState {
  slot: SlotKey;
  manifest: string;
  identity: "left" | "right" | "both";
  width: number;
  height: number;
  measurements: Partial<Record<SideKey, Measurement>>;
  errors: Partial<Record<SideKey, string>>;
}

export interface SessionState {
  session_id: string;
  view: View;
  indicator: Indicator;
  warning: string | null;
  studies: StudyState[];
}

export interface VoiceResponse {
  state: string;
  indicator: Indicator;
  view: View;
  action: string | null;
}

export interface LineEdit {
  slot: SlotKey;
  side: SideKey;
  which: "neck" | "shaft";
  endpoint: 0 | 1;
  x: number;
  y: number;
}

export interface LineResponse {
  ccd_degrees: number;
  side: SideKey;
  slot: SlotKey;
}

export interface SnapshotResponse {
  png: string;
  json: string;
}
