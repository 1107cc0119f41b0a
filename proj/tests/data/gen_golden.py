"""Regenerates golden_telemetry.csv and golden_metrics.json.

The metrics are computed here with numpy, independently of the C++ code,
from the same definitions: Schmitt-trigger window on |fx|, trapezoid means
with interpolated edges, strides at 2 pi steps of the unwrapped left leg.
"""
import json
import math
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
RATE = 100.0
DURATION = 12.0
THRESHOLD, HYSTERESIS, MIN_DURATION = 0.05, 0.02, 0.25
L_CHANNEL, MASS, G = 0.28, 0.087, 9.81


def make_trace(seed=20240611):
    rng = np.random.default_rng(seed)
    t = np.arange(int(DURATION * RATE) + 1) / RATE
    inside = (t >= 2.03) & (t < 9.53)
    fx = np.where(inside, -(0.13 + 0.04 * np.sin(2 * np.pi * t)), 0.0) + rng.normal(0, 0.01, t.size)
    fy = rng.normal(0, 0.015, t.size)
    fz = np.where(inside, -0.06, 0.0) + rng.normal(0, 0.02, t.size)
    phase = 2 * np.pi * t + 0.3 + rng.normal(0, 0.02, t.size)
    left = np.array([math.remainder(p, 2 * math.pi) for p in phase])
    right = np.array([math.remainder(p + math.pi, 2 * math.pi) for p in phase])
    power = 2.0 + 0.3 * np.sin(4 * np.pi * t) + np.where(inside, 0.25, 0.0) + rng.normal(0, 0.05, t.size)
    return np.column_stack([t, fx, fy, fz, left, right, power])


def detect_window(t, fx):
    release = THRESHOLD - HYSTERESIS
    engaged, found = False, False
    first = last = 0.0
    enter = exit_ = None
    for ti, f in zip(t, np.abs(fx)):
        if not engaged:
            if f > THRESHOLD:
                engaged, first, last = True, ti, ti
        elif f < release:
            engaged = False
            if last - first >= MIN_DURATION - 1e-9:
                enter = first if not found else enter
                exit_, found = last, True
        else:
            last = ti
    if engaged and last - first >= MIN_DURATION - 1e-9:
        enter = first if not found else enter
        exit_, found = last, True
    if not found:
        return t[0], t[-1], True
    return enter, exit_, False


def integrate(t, y, a, b):
    a, b = max(a, t[0]), min(b, t[-1])
    if b <= a:
        return 0.0
    lo = np.maximum(a, t[:-1])
    hi = np.minimum(b, t[1:])
    keep = hi > lo
    i = np.nonzero(keep)[0]
    slope = (y[i + 1] - y[i]) / (t[i + 1] - t[i])
    ya = y[i] + slope * (lo[i] - t[i])
    yb = y[i] + slope * (hi[i] - t[i])
    return float(np.sum(0.5 * (ya + yb) * (hi[i] - lo[i])))


def strides(angle, t, half=8):
    n = len(t)
    if n < 2:
        return []
    u = np.empty(n)
    u[0] = angle[0]
    for i in range(1, n):
        u[i] = u[i - 1] + math.remainder(angle[i] - angle[i - 1], 2 * math.pi)
    med = np.array([np.median(u[i - h:i + h + 1]) for i in range(n) for h in [min(2, i, n - 1 - i)]])

    def line(c):
        lo, hi = max(0, c - half), min(n - 1, c + half)
        dt = t[lo:hi + 1] - t[c]
        mt, ma = dt.mean(), u[lo:hi + 1].mean()
        stt = np.sum((dt - mt) ** 2)
        slope = np.sum((dt - mt) * (u[lo:hi + 1] - ma)) / stt if stt > 0 else 0.0
        return ma - slope * mt, slope

    theta0, _ = line(0)
    out, start, target, j = [], t[0], theta0 + 2 * math.pi, 1
    while True:
        while j < n and med[j] < target - 1e-9:
            j += 1
        if j >= n:
            break
        span = med[j] - med[j - 1]
        frac = min(max((target - med[j - 1]) / span, 0.0), 1.0) if span > 0 else 1.0
        tb = t[j - 1] + frac * (t[j] - t[j - 1])
        value, slope = line(j)
        if slope > 0:
            refined = t[j] + (target - value) / slope
            reach = t[min(n - 1, j + 1)] - t[max(j - 2, 0)]
            if abs(refined - tb) <= reach:
                tb = refined
        tb = min(max(tb, start), t[-1])
        out.append((start, tb))
        start = tb
        target += 2 * math.pi
    return out


def metrics(data):
    t, fx, fz, left, power = data[:, 0], data[:, 1], data[:, 3], data[:, 4], data[:, 6]
    enter, exit_, free = detect_window(t, fx)
    dur = exit_ - enter
    drag = -fx
    v = L_CHANNEL / dur
    mean_fx = integrate(t, drag, enter, exit_) / dur
    elec = integrate(t, power, enter, exit_)
    out = {
        "mean_fx_n": mean_fx,
        "mean_fz_n": integrate(t, fz, enter, exit_) / dur,
        "mean_power_w": elec / dur,
        "mean_velocity_mps": v,
        "drag_energy_j": mean_fx * L_CHANNEL,
        "electrical_energy_j": elec,
        "specific_resistance": (elec / dur) / (MASS * G * v),
        "window": {"t_enter_s": enter, "t_exit_s": exit_, "free_run": free},
        "strides": [],
    }
    sel = (t >= enter) & (t <= exit_)
    for a, b in strides(left[sel], t[sel]):
        d = b - a
        m = integrate(t, drag, a, b) / d
        e = integrate(t, power, a, b)
        out["strides"].append({
            "t_start_s": a,
            "t_end_s": b,
            "mean_fx_n": m,
            "drag_energy_j": m * v * d,
            "electrical_energy_j": e,
            "specific_resistance": (e / d) / (MASS * G * v),
        })
    return out


def main():
    data = make_trace()
    with open(HERE / "golden_telemetry.csv", "w", newline="\n") as f:
        f.write("t_s,fx_n,fy_n,fz_n,leg_left_rad,leg_right_rad,power_w\n")
        for row in data:
            f.write(",".join(repr(float(x)) for x in row) + "\n")
    # Re-read so the oracle sees exactly the decimal text the C++ side parses.
    data = np.loadtxt(HERE / "golden_telemetry.csv", delimiter=",", skiprows=1)
    with open(HERE / "golden_metrics.json", "w") as f:
        json.dump(metrics(data), f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
