import type { Indicator, SessionState, StudyState, View } from "./types";

// Pure presentation logic: everything here is derived from a service
// response. The UI never computes an angle itself.

export interface AngleReadout {
  side: "left" | "right";
  text: string;
}

export interface PaneModel {
  slot: "left" | "right";
  study: StudyState;
}

export interface ViewModel {
  layout: View;
  panes: PaneModel[];
  readouts: AngleReadout[];
  indicatorColor: string;
  warning: string | null;
}

export const IDLE_COLOR = "#cccccc";
export const ACTIVE_COLOR = "#ff1a1a";

// fraction of the viewport width taken by the image region
export const IMAGE_PANE_FRACTION = 4 / 5;

export function formatAngle(degrees: number): string {
  return `${degrees.toFixed(1)}°`;
}

export function indicatorColor(indicator: Indicator): string {
  return indicator === "active" ? ACTIVE_COLOR : IDLE_COLOR;
}

function zoomTarget(state: SessionState, side: "left" | "right"): StudyState | undefined {
  // zoom refers to a femur, not a screen slot; a two-sided study qualifies
  const byFemur = state.studies.find(
    (s) => s.identity === side || s.identity === "both"
  );
  return byFemur ?? state.studies.find((s) => s.slot === side);
}

function visiblePanes(state: SessionState): PaneModel[] {
  if (state.view === "left_zoom" || state.view === "right_zoom") {
    const side = state.view === "left_zoom" ? "left" : "right";
    const study = zoomTarget(state, side);
    return study ? [{ slot: study.slot, study }] : [];
  }
  const ordered = [...state.studies].sort((a) => (a.slot === "left" ? -1 : 1));
  return ordered.map((study) => ({ slot: study.slot, study }));
}

// The right femur's angle is always stacked above the left femur's.
function angleReadouts(state: SessionState): AngleReadout[] {
  const readouts: AngleReadout[] = [];
  for (const side of ["right", "left"] as const) {
    for (const study of state.studies) {
      const m = study.measurements[side];
      if (m) {
        readouts.push({ side, text: formatAngle(m.ccd_degrees) });
      }
    }
  }
  return readouts;
}

export function buildViewModel(state: SessionState): ViewModel {
  return {
    layout: state.view,
    panes: visiblePanes(state),
    readouts: angleReadouts(state),
    indicatorColor: indicatorColor(state.indicator),
    warning: state.warning,
  };
}
