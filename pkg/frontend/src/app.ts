import { ApiClient } from "./api";
import { SessionController } from "./controller";
import { DragController } from "./drag";
import type { Measurement, Point, SideKey, SlotKey } from "./types";
import { IMAGE_PANE_FRACTION, ViewModel } from "./viewmodel";

const NECK_COLOR = "#ffd500";
const SHAFT_COLOR = "#00e5ff";
const ENDPOINT_COLOR = "#ffffff";
const ENDPOINT_HOVER_COLOR = "#ff9500";
const ENDPOINT_RADIUS = 6;

interface EndpointRef {
  slot: SlotKey;
  side: SideKey;
  which: "neck" | "shaft";
  endpoint: 0 | 1;
  at: Point;
}

// Canvas application glue: layout, line overlays, hover + drag wiring,
// toolbar buttons, and the voice token input fallback. All measurement
// logic stays on the service side.
export function mountApp(root: HTMLElement, baseUrl: string): void {
  const client = new ApiClient(baseUrl);

  root.innerHTML = "";
  const canvas = document.createElement("canvas");
  canvas.style.width = `${IMAGE_PANE_FRACTION * 100}%`;
  const toolbar = document.createElement("div");
  toolbar.style.width = `${(1 - IMAGE_PANE_FRACTION) * 100}%`;
  const indicator = document.createElement("div");
  const readouts = document.createElement("div");
  const banner = document.createElement("div");
  const tokenInput = document.createElement("input");
  tokenInput.placeholder = "voice token";
  toolbar.append(indicator, readouts, tokenInput);
  root.append(canvas, toolbar, banner);

  let endpoints: EndpointRef[] = [];
  let hover: EndpointRef | null = null;
  let drag: DragController | null = null;

  function endpointAt(x: number, y: number): EndpointRef | null {
    for (const ref of endpoints) {
      const [ex, ey] = ref.at;
      if (Math.hypot(x - ex, y - ey) <= ENDPOINT_RADIUS) {
        return ref;
      }
    }
    return null;
  }

  function drawMeasurement(
    ctx: CanvasRenderingContext2D, slot: SlotKey, side: SideKey, m: Measurement
  ): void {
    for (const [which, pts, color] of [
      ["neck", m.neck_endpoints, NECK_COLOR],
      ["shaft", m.shaft_endpoints, SHAFT_COLOR],
    ] as const) {
      ctx.strokeStyle = color;
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(pts[0][0], pts[0][1]);
      ctx.lineTo(pts[1][0], pts[1][1]);
      ctx.stroke();
      pts.forEach((p, i) => {
        const ref: EndpointRef = {
          slot, side, which, endpoint: i as 0 | 1, at: [p[0], p[1]],
        };
        endpoints.push(ref);
        const hovered =
          hover !== null &&
          hover.slot === slot && hover.side === side &&
          hover.which === which && hover.endpoint === i;
        ctx.fillStyle = hovered ? ENDPOINT_HOVER_COLOR : ENDPOINT_COLOR;
        ctx.beginPath();
        ctx.arc(p[0], p[1], ENDPOINT_RADIUS / 2, 0, 2 * Math.PI);
        ctx.fill();
      });
    }
  }

  function render(vm: ViewModel): void {
    const ctx = canvas.getContext("2d");
    if (!ctx) {
      return;
    }
    endpoints = [];
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    for (const pane of vm.panes) {
      for (const side of ["left", "right"] as const) {
        const m = pane.study.measurements[side];
        if (m) {
          drawMeasurement(ctx, pane.slot, side, m);
        }
      }
    }
    indicator.style.backgroundColor = vm.indicatorColor;
    readouts.innerHTML = "";
    for (const r of vm.readouts) {
      const field = document.createElement("div");
      field.textContent = r.text;
      readouts.append(field);
    }
    banner.textContent = vm.warning ?? "";
  }

  void (async () => {
    const { session_id } = await client.createSession();
    const controller = new SessionController(client, session_id);
    controller.onChange(render);
    await controller.refresh();
    controller.startPolling();

    tokenInput.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter" && tokenInput.value.trim()) {
        void controller.sendToken(tokenInput.value.trim());
        tokenInput.value = "";
      }
    });

    canvas.addEventListener("mousemove", (ev) => {
      if (drag) {
        drag.move(ev.offsetX, ev.offsetY);
        return;
      }
      const before = hover;
      hover = endpointAt(ev.offsetX, ev.offsetY);
      if (before !== hover) {
        const vm = controller.viewModel;
        if (vm) {
          render(vm);
        }
      }
    });

    canvas.addEventListener("mousedown", (ev) => {
      const ref = endpointAt(ev.offsetX, ev.offsetY);
      if (ref) {
        drag = new DragController(
          client, session_id,
          { slot: ref.slot, side: ref.side, which: ref.which, endpoint: ref.endpoint },
          ref.at
        );
      }
    });

    canvas.addEventListener("mouseup", () => {
      if (drag) {
        void drag.settle().then(() => controller.refresh());
        drag = null;
      }
    });
  })();
}
