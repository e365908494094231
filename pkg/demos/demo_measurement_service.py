"""
Measurement service over HTTP
=============================

Drives the HTTP API in-process: open a study, nudge an endpoint, steer the
view by voice, and save an annotated snapshot. The same app is what
`ccd serve` exposes on a real port.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from ccdmeasure import SyntheticSpec, write_dataset
from ccdmeasure.service import MeasurementService, create_app

workdir = Path(tempfile.mkdtemp(prefix="ccd_demo_"))
write_dataset(SyntheticSpec(seed=5, cases=1, width=256, height=256), workdir)

service = MeasurementService(
    watch_folder=workdir, save_folder=workdir / "snapshots"
)
client = TestClient(create_app(service))

sid = client.post("/sessions").json()["session_id"]
print(f"session {sid}")

# open the newest study from the watch folder
state = client.post(f"/sessions/{sid}/open-next").json()
m = state["studies"][0]["measurements"]["left"]
print(f"left CCD as fitted: {m['ccd_degrees']:.2f} deg")

# drag the outer neck endpoint a few pixels; the service re-measures
x, y = m["neck_endpoints"][1]
r = client.patch(f"/sessions/{sid}/lines", json={
    "slot": "left", "side": "left", "which": "neck",
    "endpoint": 1, "x": x + 6.0, "y": y - 2.0,
})
print(f"left CCD after drag: {r.json()['ccd_degrees']:.2f} deg")

# voice: wake word, then zoom the right femur
for token in ("activate", "right"):
    r = client.post(f"/sessions/{sid}/voice", json={"token": token})
print(f"view is now: {r.json()['view']}")

# save an annotated snapshot plus its JSON sidecar
r = client.post(f"/sessions/{sid}/snapshot", json={"note": "demo run"})
print(f"snapshot: {r.json()['png']}")
print(f"sidecar : {r.json()['json']}")
