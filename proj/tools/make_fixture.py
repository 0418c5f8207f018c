#!/usr/bin/env python3
"""Generate the bundled classroom-session fixture.

Writes, under tests/fixtures/:
  macbeth_poster.json     23-object poster with an initial layout
  macbeth_session.jsonl   token log whose completed operations are
                          Eraser 19, Mover 100, Player1 38, Player2 38,
                          Resizer 60, Stopper 19, Undoer 6, Zoomer 34
  macbeth_expected.json   what the log must produce, computed by the
                          independent board model in this file

The model below is a from-scratch Python rendition of the board rules. It is
used to choose legal gestures and to predict the final board, so the C++
engine can be checked against it.
"""

import argparse
import json
import random
from pathlib import Path

N = 8
TARGET = {
    "Eraser": 19, "Mover": 100, "Player1": 38, "Player2": 38,
    "Resizer": 60, "Stopper": 19, "Undoer": 6, "Zoomer": 34,
}
TOTAL = sum(TARGET.values())  # 314
SPAN_MS = 82 * 60 * 1000
BREAK_MS = 600 * 1000
BREAK_AFTER = (104, 209)  # gap indices holding the two breaks
BASE_MS = 10_000

NAMES = [
    "witches", "dagger", "castle", "banquet", "ghost", "lady", "letter", "crown",
    "forest", "owl", "sleepwalk", "blood", "knock", "porter", "duncan", "banquo",
    "fleance", "cauldron", "apparition", "birnam", "dunsinane", "macduff", "tomorrow",
]

LAYOUT = [  # id index -> (col, row, w, h), listed back to front
    (0, 0, 0, 2, 2), (1, 2, 0, 2, 1), (2, 4, 0, 1, 1), (3, 5, 0, 3, 2),
    (4, 0, 2, 1, 2), (5, 1, 2, 2, 2), (6, 3, 1, 2, 2), (7, 5, 2, 2, 2),
    (8, 7, 2, 1, 1), (9, 0, 4, 1, 1), (10, 1, 4, 2, 1), (11, 3, 3, 2, 2),
    (12, 5, 4, 1, 1), (13, 6, 4, 2, 2), (14, 0, 5, 2, 2), (15, 2, 5, 1, 1),
    (16, 3, 5, 2, 1), (17, 5, 5, 1, 2), (18, 0, 7, 1, 1), (19, 2, 6, 3, 2),
    (20, 6, 6, 1, 1), (21, 7, 7, 1, 1), (22, 4, 4, 2, 2),
]


def object_id(i):
    return f"m{i + 1:02d}-{NAMES[i]}"


def channels_for(i):
    if i < 8:
        return [
            {"kind": "video", "media_ref": f"media/{NAMES[i]}-scene.mp4"},
            {"kind": "audio", "media_ref": f"media/{NAMES[i]}-reading.mp3"},
        ]
    if i < 16:
        kind = "video" if i % 2 == 0 else "audio"
        ext = "mp4" if kind == "video" else "mp3"
        return [{"kind": kind, "media_ref": f"media/{NAMES[i]}.{ext}"}]
    return []


def build_manifest():
    objects = [
        {"id": object_id(i), "image_ref": f"images/{NAMES[i]}.png", "av_channels": channels_for(i)}
        for i in range(23)
    ]
    entries = [
        {"object_id": object_id(i), "rect": {"col": c, "row": r, "w": w, "h": h}}
        for (i, c, r, w, h) in LAYOUT
    ]
    return {
        "poster_id": "macbeth",
        "title": "Macbeth: voices in the dark",
        "objects": objects,
        "initial_layout": {"name": "initial", "entries": entries},
    }


# ---------------------------------------------------------------- board model

def contains(rect, cell):
    c, r, w, h = rect
    return c <= cell[0] < c + w and r <= cell[1] < r + h


def rect_ok(rect):
    c, r, w, h = rect
    return 0 <= c and 0 <= r and 1 <= w and 1 <= h and c + w <= N and r + h <= N


def edges_of(rect, cell):
    c, r, w, h = rect
    out = []
    if cell[0] == c:
        out.append("left")
    if cell[0] == c + w - 1:
        out.append("right")
    if cell[1] == r:
        out.append("top")
    if cell[1] == r + h - 1:
        out.append("bottom")
    return out


def move_edge(rect, edge, line):
    c, r, w, h = rect
    right, bottom = c + w - 1, r + h - 1
    if not 0 <= line < N:
        return None
    if edge == "left":
        out = (line, r, right - line + 1, h)
    elif edge == "right":
        out = (c, r, line - c + 1, h)
    elif edge == "top":
        out = (c, line, w, bottom - line + 1)
    else:
        out = (c, r, w, line - r + 1)
    return out if rect_ok(out) else None


def edge_pos(rect, edge):
    c, r, w, h = rect
    return {"left": c, "right": c + w - 1, "top": r, "bottom": r + h - 1}[edge]


def resize_outcome(rect, edges, cell):
    """('resize', new_rect) | ('noop', None) | ('invalid', None)."""
    best, best_shift, zero = None, 0, False
    for edge in ("left", "right", "top", "bottom"):
        if edge not in edges:
            continue
        line = cell[0] if edge in ("left", "right") else cell[1]
        new = move_edge(rect, edge, line)
        if new is None:
            continue
        shift = abs(line - edge_pos(rect, edge))
        if shift == 0:
            zero = True
        elif shift > best_shift:
            best, best_shift = new, shift
    if best is not None:
        return "resize", best
    return ("noop", None) if zero else ("invalid", None)


class Model:
    def __init__(self, manifest):
        self.channels = {o["id"]: len(o["av_channels"]) for o in manifest["objects"]}
        self.rect, self.zoom, self.playing, self.z = {}, {}, {}, []
        for e in manifest["initial_layout"]["entries"]:
            rr = e["rect"]
            self.rect[e["object_id"]] = (rr["col"], rr["row"], rr["w"], rr["h"])
            self.zoom[e["object_id"]] = None
            self.playing[e["object_id"]] = None
            self.z.append(e["object_id"])
        self.undo = []

    def top(self, cell):
        for oid in reversed(self.z):
            if contains(self.rect[oid], cell):
                return oid
        return None

    def visible_cells(self):
        vis = {}
        for row in range(N):
            for col in range(N):
                oid = self.top((col, row))
                if oid is not None:
                    vis.setdefault(oid, []).append((col, row))
        return vis

    def empty_cells(self):
        return [(c, r) for r in range(N) for c in range(N) if self.top((c, r)) is None]

    def front(self, oid):
        self.z.remove(oid)
        self.z.append(oid)

    def snapshot(self, oid):
        return (self.rect[oid], self.zoom[oid], self.playing[oid])

    def set_geometry(self, kind, oid, rect):
        if rect == self.rect[oid]:
            return
        self.undo.append((kind, oid, self.snapshot(oid), list(self.z)))
        self.rect[oid] = rect
        self.zoom[oid] = None
        self.front(oid)

    def toggle_zoom(self, oid):
        if self.zoom[oid] is None:
            self.zoom[oid] = self.rect[oid]
            self.rect[oid] = (0, 0, N, N)
        else:
            self.rect[oid] = self.zoom[oid]
            self.zoom[oid] = None
        self.front(oid)

    def erase(self, oid):
        self.undo.append(("erase", oid, self.snapshot(oid), list(self.z)))
        self.z.remove(oid)
        del self.rect[oid], self.zoom[oid], self.playing[oid]

    def undo_last(self):
        kind, oid, (rect, zoom, playing), z = self.undo.pop()
        if kind != "erase":
            playing = self.playing[oid]
        self.rect[oid], self.zoom[oid], self.playing[oid] = rect, zoom, playing
        self.z = z


# ------------------------------------------------------------------ generator

class Plan:
    """One completed operation: the placements that make it, plus its effect."""

    def __init__(self, token, placements, apply):
        self.token = token
        self.placements = placements  # [(token, cell)] ; last one completes
        self.apply = apply


def options(model, kind, rng):
    vis = model.visible_cells()
    ids = sorted(vis)
    if kind == "Mover":
        rng.shuffle(ids)
        for oid in ids:
            c, r, w, h = model.rect[oid]
            src = rng.choice(vis[oid])
            anchor = (src[0] - c, src[1] - r)
            origins = [(x, y) for y in range(N - h + 1) for x in range(N - w + 1) if (x, y) != (c, r)]
            if not origins:
                continue
            o = rng.choice(origins)
            dst = (o[0] + anchor[0], o[1] + anchor[1])
            steps = [("Mover", src)]
            if rng.random() < 0.08:
                bad = [(x, y) for y in range(N) for x in range(N)
                       if not rect_ok((x - anchor[0], y - anchor[1], w, h))]
                if bad:
                    steps.append(("Mover", rng.choice(bad)))
            steps.append(("Mover", dst))
            new = (o[0], o[1], w, h)
            return Plan("Mover", steps, lambda m, oid=oid, new=new: m.set_geometry("move", oid, new))
        return None
    if kind == "Resizer":
        rng.shuffle(ids)
        for oid in ids:
            rect = model.rect[oid]
            border = [cell for cell in vis[oid] if edges_of(rect, cell)]
            if not border:
                continue
            src = rng.choice(border)
            edges = edges_of(rect, src)
            good, ok = [], []
            for y in range(N):
                for x in range(N):
                    res, new = resize_outcome(rect, edges, (x, y))
                    if res == "resize":
                        ok.append(((x, y), new))
                        if new[2] * new[3] <= 12:
                            good.append(((x, y), new))
            pool = good or ok
            if not pool:
                continue
            dst, new = rng.choice(pool)
            return Plan("Resizer", [("Resizer", src), ("Resizer", dst)],
                        lambda m, oid=oid, new=new: m.set_geometry("resize", oid, new))
        return None
    if kind in ("Player1", "Player2"):
        ch = 1 if kind == "Player1" else 2
        cands = [oid for oid in ids if model.channels[oid] >= ch and model.playing[oid] != ch]
        if not cands:
            return None
        oid = rng.choice(cands)

        def play(m, oid=oid, ch=ch):
            m.playing[oid] = ch
        return Plan(kind, [(kind, rng.choice(vis[oid]))], play)
    if kind == "Stopper":
        cands = [oid for oid in ids if model.playing[oid] is not None]
        if cands:
            oid = rng.choice(cands)

            def stop(m, oid=oid):
                m.playing[oid] = None
            return Plan(kind, [(kind, rng.choice(vis[oid]))], stop)
        empty = model.empty_cells()
        if empty and any(p is not None for p in model.playing.values()):
            def stop_all(m):
                for k in m.playing:
                    m.playing[k] = None
            return Plan(kind, [(kind, rng.choice(empty))], stop_all)
        return None
    if kind == "Zoomer":
        zoomed = [oid for oid in ids if model.zoom[oid] is not None]
        oid = rng.choice(zoomed) if zoomed and rng.random() < 0.8 else (rng.choice(ids) if ids else None)
        if oid is None:
            return None
        return Plan(kind, [(kind, rng.choice(vis[oid]))], lambda m, oid=oid: m.toggle_zoom(oid))
    if kind == "Eraser":
        if len(model.z) <= 4 or not ids:
            return None
        oid = rng.choice(ids)
        return Plan(kind, [(kind, rng.choice(vis[oid]))], lambda m, oid=oid: m.erase(oid))
    if kind == "Undoer":
        if not model.undo:
            return None
        return Plan(kind, [(kind, (rng.randrange(N), rng.randrange(N)))], lambda m: m.undo_last())
    raise ValueError(kind)


def noise(model, next_token, rng):
    """A signal-only placement (or an abandoned first placement), or None."""
    roll = rng.random()
    if roll < 0.02:
        empty = model.empty_cells()
        if empty:
            return [(rng.choice(["Mover", "Eraser", "Zoomer", "Player1"]), rng.choice(empty)),
                    "NotOnObject"]
    elif roll < 0.035:
        vis = model.visible_cells()
        idle = [oid for oid in sorted(vis) if model.playing[oid] is None]
        if idle:
            oid = rng.choice(idle)
            return [("Stopper", rng.choice(vis[oid])), "NotPlaying"]
    elif roll < 0.05 and next_token != "Mover":
        vis = model.visible_cells()
        if vis:
            oid = rng.choice(sorted(vis))
            return [("Mover", rng.choice(vis[oid])), "GestureCancelled"]
    return None


def gaps(rng):
    normal = TOTAL - 1 - len(BREAK_AFTER)
    raw = [rng.uniform(0.45, 1.8) for _ in range(normal)]
    budget = SPAN_MS - BREAK_MS * len(BREAK_AFTER)
    scaled = [int(x * budget / sum(raw)) for x in raw]
    scaled[0] += budget - sum(scaled)
    out, it = [], iter(scaled)
    for g in range(TOTAL - 1):
        out.append(BREAK_MS if g in BREAK_AFTER else next(it))
    assert sum(out) == SPAN_MS
    assert all(4000 <= g < 300_000 for i, g in enumerate(out) if i not in BREAK_AFTER)
    return out


def generate(seed, manifest):
    rng = random.Random(seed)
    model = Model(manifest)
    remaining = dict(TARGET)
    plans, noises = [], []
    for _ in range(TOTAL):
        kinds = [k for k, v in remaining.items() if v > 0]
        weights = [remaining[k] for k in kinds]
        chosen = None
        for _attempt in range(20):
            kind = rng.choices(kinds, weights)[0]
            chosen = options(model, kind, rng)
            if chosen is not None:
                break
        if chosen is None:
            return None
        noises.append(noise(model, chosen.token, rng))
        chosen.apply(model)
        remaining[chosen.token] -= 1
        plans.append(chosen)
    return rng, model, plans, noises


def build_log(rng, plans, noises):
    times, t = [], BASE_MS
    for i, g in enumerate([0] + gaps(rng)):
        t += g
        times.append(t)
    events = []
    expected_signals = {}

    def place(ts, token, cell):
        events.append({"ts_ms": ts, "token": token, "phase": "placed", "col": cell[0], "row": cell[1]})
        events.append({"ts_ms": ts + 200, "token": token, "phase": "lifted", "col": cell[0], "row": cell[1]})

    for i, (plan, nz) in enumerate(zip(plans, noises)):
        start = times[i - 1] + 400 if i > 0 else BASE_MS - 3000
        span = times[i] - start
        if nz is not None:
            (token, cell), code = nz
            place(start + span * 15 // 100, token, cell)
            expected_signals[code] = expected_signals.get(code, 0) + 1
        steps = plan.placements
        for k, (token, cell) in enumerate(steps[:-1]):
            place(start + span * (40 + 20 * k) // 100, token, cell)
            if k > 0:
                expected_signals["DestinationOutOfBounds"] = expected_signals.get("DestinationOutOfBounds", 0) + 1
        token, cell = steps[-1]
        place(times[i], token, cell)
    for a, b in zip(events, events[1:]):
        assert a["ts_ms"] <= b["ts_ms"], (a, b)
    return events, times, expected_signals


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    manifest = build_manifest()
    seed = args.seed
    while True:
        result = generate(seed, manifest)
        if result is not None:
            break
        seed += 1
    rng, model, plans, noises = result
    events, times, expected_signals = build_log(rng, plans, noises)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "macbeth_poster.json").write_text(json.dumps(manifest, indent=2) + "\n")
    with open(out / "macbeth_session.jsonl", "w") as f:
        for e in events:
            f.write(json.dumps(e, separators=(",", ":")) + "\n")

    counts = {}
    for p in plans:
        counts[p.token] = counts.get(p.token, 0) + 1
    expected = {
        "generator_seed": seed,
        "total_ops": len(plans),
        "counts": counts,
        "first_op_ms": times[0],
        "last_op_ms": times[-1],
        "records": len(events),
        "signals": expected_signals,
        "final": {
            "z_order": model.z,
            "rects": {k: list(v) for k, v in sorted(model.rect.items())},
            "zoom_saved": {k: list(v) for k, v in sorted(model.zoom.items()) if v is not None},
            "playing": {k: v for k, v in sorted(model.playing.items()) if v is not None},
            "undo_depth": len(model.undo),
        },
    }
    (out / "macbeth_expected.json").write_text(json.dumps(expected, indent=2) + "\n")
    print(f"seed {seed}: {len(plans)} ops, {len(events)} records, {len(model.z)} objects on board")


if __name__ == "__main__":
    main()
