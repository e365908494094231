import { describe, expect, it } from "vitest";

import {
  ACTIVE_COLOR,
  IDLE_COLOR,
  IMAGE_PANE_FRACTION,
  buildViewModel,
  formatAngle,
  indicatorColor,
} from "../src/viewmodel";
import { twoStudyState } from "./fake_service";

describe("angle formatting", () => {
  it("shows one decimal place with a degree sign", () => {
    expect(formatAngle(131.24)).toBe("131.2°");
    expect(formatAngle(90)).toBe("90.0°");
    expect(formatAngle(128.75)).toBe("128.8°");
  });
});

describe("indicator", () => {
  it("idle renders light grey, active renders bright red", () => {
    expect(indicatorColor("idle")).toBe(IDLE_COLOR);
    expect(indicatorColor("active")).toBe(ACTIVE_COLOR);
  });
});

describe("layout", () => {
  it("image pane takes four fifths of the viewport", () => {
    expect(IMAGE_PANE_FRACTION).toBe(0.8);
  });

  it("split view shows the right-femur study in the left half", () => {
    const vm = buildViewModel(twoStudyState());
    expect(vm.panes).toHaveLength(2);
    expect(vm.panes[0].slot).toBe("left");
    expect(vm.panes[0].study.identity).toBe("right");
    expect(vm.panes[1].study.identity).toBe("left");
  });

  it("right femur angle is stacked above the left femur angle", () => {
    const vm = buildViewModel(twoStudyState());
    expect(vm.readouts.map((r) => r.side)).toEqual(["right", "left"]);
    expect(vm.readouts[0].text).toBe("131.2°");
    expect(vm.readouts[1].text).toBe("128.7°");
  });

  it("right zoom shows only the right femur study", () => {
    const state = twoStudyState();
    state.view = "right_zoom";
    const vm = buildViewModel(state);
    expect(vm.panes).toHaveLength(1);
    expect(vm.panes[0].study.identity).toBe("right");
  });

  it("left zoom follows the femur, not the screen slot", () => {
    const state = twoStudyState();
    state.view = "left_zoom";
    const vm = buildViewModel(state);
    expect(vm.panes).toHaveLength(1);
    expect(vm.panes[0].study.identity).toBe("left");
  });

  it("a two-sided study satisfies either zoom", () => {
    const state = twoStudyState();
    state.studies = [{ ...state.studies[0], identity: "both" }];
    state.view = "left_zoom";
    expect(buildViewModel(state).panes).toHaveLength(1);
  });
});
