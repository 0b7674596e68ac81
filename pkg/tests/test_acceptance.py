"""Acceptance suite: one test per release criterion.

Each test prints a ``PASS: ...`` line with the measured values (run with
``pytest tests/test_acceptance.py -v -s``).  The end-to-end trend criteria run
small campaigns (5 seeds per configuration point, 2 s of simulated time each)
through a process pool; a session fixture executes all runs once and the
tests read from the per-run extracts.

Statistics used by the trend criteria:

* PDR is pooled over seeds: summed deliveries over summed generations within
  the measurement window (packets still in flight count against it).
* Rain drops are paired per (link, slot) sample between the two rain rates of
  the same seed, so beam scalloping and two-ray fading cancel; the criterion
  evaluates the median of those paired drops.
* Latency medians pool the per-packet values of all seeds.
"""

import csv
import filecmp
import math
import multiprocessing
import time
from dataclasses import replace

import numpy as np
import pytest

from seahaul import bap, channel, cli, engine, scenario, sched

SEEDS = (1, 2, 3, 4, 5)
RATES_MBPS = (60, 80, 100, 120, 140)
RAINS = (0.0, 15.0, 30.0)


def _ok(name: str, detail: str) -> None:
    print(f"PASS: {name}: {detail}")


# --------------------------------------------------------------------------
# Campaign machinery
# --------------------------------------------------------------------------


def _build_scenario(spec: dict) -> scenario.Scenario:
    scn = scenario.builtin_topology(spec["topo"], duration_s=spec.get("duration", 2.0), seed=spec["seed"])
    scn = replace(scn, channel=replace(scn.channel, rain_rate_mmh=spec.get("rain", 0.0)))
    scn = replace(
        scn,
        traffic=replace(
            scn.traffic,
            dl_rate_bps=spec.get("dl_rate_mbps", 60) * 1e6,
            ul_rate_factor=spec.get("ul_factor", 0.2),
        ),
    )
    if spec.get("pattern"):
        scn = replace(scn, slot_pattern=scenario.SlotPattern.parse(spec["pattern"]))
    scn = replace(scn, mux=replace(scn.mux, mode=spec.get("mux", "tdm"), n_s_odd=spec.get("ns_odd", 6)))
    return scn


def _acceptance_worker(item):
    key, spec = item
    scn = _build_scenario(spec)
    t0 = time.time()
    res = engine.run(scn)
    wall = time.time() - t0

    out = {
        "wall_s": wall,
        "counts": res.counts(),
        "half_duplex_violations": res.half_duplex_violations,
        "depth_violations": res.depth_violations,
    }

    warmup_s = scn.warmup_fraction * scn.duration_s
    cols = res.packets
    measured = cols["created_s"] >= warmup_s
    for direction in ("dl", "ul"):
        fids = np.array([f for f, fl in res.flows.items() if fl.direction == direction])
        m = measured & np.isin(cols["flow_id"], fids)
        delivered = int(((cols["outcome"][m]) == engine.OUTCOME_DELIVERED).sum())
        out[f"{direction}_generated"] = int(m.sum())
        out[f"{direction}_delivered"] = delivered

    extract = spec.get("extract", ())
    if "links" in extract:
        sl = res.recorded_slots("dl")
        out["snr_dl"] = res.tapes["dl"].snr_db[:, sl]
        out["sinr_dl"] = res.sinr_db["dl"][:, sl]
        inter = res.interference_dbm["dl"][:, sl]
        out["interference_values"] = inter[~np.isnan(inter)]
        out["n_link_samples"] = int(np.isfinite(res.sinr_db["dl"][:, sl]).sum())
    if "latency" in extract:
        m = measured & (cols["outcome"] == engine.OUTCOME_DELIVERED)
        dl_fids = np.array([f for f, fl in res.flows.items() if fl.direction == "dl"])
        m &= np.isin(cols["flow_id"], dl_fids)
        out["dl_latency_s"] = cols["delivered_s"][m] - cols["created_s"][m]
    return key, out


def _job_list():
    jobs = []
    for topo in (1, 3):
        for rain in RAINS:
            for seed in SEEDS:
                jobs.append(
                    (("rain", topo, rain, seed), {"topo": topo, "rain": rain, "seed": seed, "extract": ("links",)})
                )
    for topo in (1, 2, 3, 4):
        for rate in RATES_MBPS:
            for seed in SEEDS:
                jobs.append(
                    (("cap", topo, rate, seed), {"topo": topo, "dl_rate_mbps": rate, "seed": seed})
                )
    for pattern in ("4DS2U", "3DS2U"):
        for seed in SEEDS:
            jobs.append(
                (
                    ("pat", pattern, seed),
                    {"topo": 3, "pattern": pattern, "dl_rate_mbps": 60, "ul_factor": 0.1, "seed": seed},
                )
            )
    for ns in (4, 6, 8):
        for seed in SEEDS:
            jobs.append(
                (("ns", ns, seed), {"topo": 3, "ns_odd": ns, "dl_rate_mbps": 60, "ul_factor": 0.2, "seed": seed, "extract": ("latency",)})
            )
    for rate in RATES_MBPS:
        for seed in SEEDS:
            jobs.append(
                (("fdm", rate, seed), {"topo": 3, "mux": "fdm", "dl_rate_mbps": rate, "seed": seed})
            )
    return jobs


@pytest.fixture(scope="session")
def campaigns():
    jobs = _job_list()
    with multiprocessing.Pool(processes=2) as pool:
        results = pool.map(_acceptance_worker, jobs, chunksize=4)
    return dict(results)


def _pooled_pdr(campaigns, keys, direction):
    generated = sum(campaigns[k][f"{direction}_generated"] for k in keys)
    delivered = sum(campaigns[k][f"{direction}_delivered"] for k in keys)
    return delivered / generated


# --------------------------------------------------------------------------
# Unit-level criteria
# --------------------------------------------------------------------------


def test_codec_exhaustive_roundtrip():
    """Header round trip holds over every one of the 2^24 encodings."""
    t0 = time.time()
    checked = 0
    for dc in (0, 1):
        for r in range(8):
            for chunk_start in range(0, 1 << 20, 1 << 18):
                block = np.arange(chunk_start, chunk_start + (1 << 18), dtype=np.uint32)
                dest = block >> 10
                path = block & 0x3FF
                dcs = np.full_like(block, dc)
                rs = np.full_like(block, r)
                wire = bap.encode_headers(dcs, rs, dest, path)
                got = bap.decode_headers(wire)
                assert (got[0] == dcs).all() and (got[1] == rs).all()
                assert (got[2] == dest).all() and (got[3] == path).all()
                # Injectivity: the three bytes reassemble the 24-bit value.
                word = (
                    (wire[:, 0].astype(np.uint32) << 16)
                    | (wire[:, 1].astype(np.uint32) << 8)
                    | wire[:, 2].astype(np.uint32)
                )
                assert np.unique(word).size == block.size
                checked += block.size
    elapsed = time.time() - t0
    assert checked == 1 << 24
    assert elapsed < 30.0
    _ok("codec exactness", f"2^24 headers round-tripped in {elapsed:.1f}s")


def test_channel_matches_independent_oracle():
    """Two-ray loss vs an independent complex-field oracle, 1e-9 dB."""
    import cmath

    C = 299_792_458.0

    def oracle(d2d, h_tx, h_rx, f_ghz, refl):
        lam = C / (f_ghz * 1e9)
        direct = math.hypot(d2d, h_tx - h_rx)
        reflected = math.hypot(d2d, h_tx + h_rx)
        alpha = 1.091 * math.exp(-0.06256 * f_ghz) + 0.06982
        delta_d = 4.0 * h_tx * h_rx / (reflected + direct)
        field = 1.0 + refl * cmath.exp(1j * alpha * 2.0 * math.pi * delta_d / lam)
        mag = max(abs(field), channel.DEEP_NULL_FLOOR)
        return -20.0 * math.log10(lam / (4.0 * math.pi * direct) * mag)

    rng = np.random.default_rng(2026)
    worst_two_ray = 0.0
    worst_fs = 0.0
    for _ in range(10_000):
        d2d = float(rng.uniform(10.0, 5000.0))
        h_tx = float(rng.uniform(2.0, 40.0))
        h_rx = float(rng.uniform(2.0, 40.0))
        f = float(rng.uniform(1.0, 100.0))
        geom = channel.Geometry(d2d, h_tx, h_rx)
        pl, _ = channel.path_loss_db(geom, channel.ChannelParams(carrier_freq_ghz=f))
        worst_two_ray = max(worst_two_ray, abs(pl - oracle(d2d, h_tx, h_rx, f, -1.0)))
        # R = 0 must reduce to free space.
        pl_r0, _ = channel.path_loss_db(geom, channel.ChannelParams(carrier_freq_ghz=f, reflection_coeff=0.0))
        fs, _ = channel.path_loss_db(geom, channel.ChannelParams(carrier_freq_ghz=f, model="free_space"))
        worst_fs = max(worst_fs, abs(pl_r0 - fs))
    assert worst_two_ray <= 1e-9
    assert worst_fs <= 1e-9
    _ok("channel oracle match", f"worst two-ray diff {worst_two_ray:.2e} dB, worst R=0 diff {worst_fs:.2e} dB")


def test_modified_model_smooths_loss_peaks():
    """Fewer loss peaks on 2-4 km links at 28 GHz with the damped phase."""
    distances = np.arange(2000.0, 4001.0, 1.0)
    counts = {}
    for model in ("modified_two_ray", "classical_two_ray"):
        params = channel.ChannelParams(carrier_freq_ghz=28.0, model=model)
        curve = [(d, channel.path_loss_db(channel.Geometry(d, 10.0, 10.0), params)[0]) for d in distances]
        counts[model] = channel.peak_count(curve)
    assert counts["modified_two_ray"] < counts["classical_two_ray"]
    _ok("loss-peak comparison", f"modified {counts['modified_two_ray']} < classical {counts['classical_two_ray']} peaks")


def test_rain_specific_attenuation_sanity():
    table = channel.bundled_rain_table("horizontal")
    gamma30 = channel.rain_specific_attenuation(channel.ChannelParams(rain_rate_mmh=30.0), table)
    assert 0.0 < gamma30 <= 15.0
    assert channel.rain_specific_attenuation(channel.ChannelParams(rain_rate_mmh=0.0), table) == 0.0
    grid = [1.0, 5.0, 15.0, 30.0, 50.0]
    gammas = [channel.rain_specific_attenuation(channel.ChannelParams(rain_rate_mmh=r), table) for r in grid]
    assert all(a < b for a, b in zip(gammas, gammas[1:]))
    _ok("rain sanity", f"gamma(26 GHz, 30 mm/h) = {gamma30:.3f} dB/km, strictly increasing in rate")


# --------------------------------------------------------------------------
# End-to-end criteria
# --------------------------------------------------------------------------


def test_star_topology_interference_free(campaigns):
    """Donor-coordinated TDMA leaves every sample interference-free."""
    walls = []
    for rain in RAINS:
        for seed in SEEDS:
            ext = campaigns[("rain", 1, rain, seed)]
            assert ext["interference_values"].size == 0
            assert ext["n_link_samples"] > 0
            walls.append(ext["wall_s"])
    assert max(walls) <= 60.0
    _ok("star interference-free", f"15 full runs, all samples 'none'; slowest run {max(walls):.1f}s")


def test_rain_resilience_by_topology(campaigns):
    """Long star links fade hard with rain; multi-hop interference fades too.

    Drops are paired per (link, slot) sample between rain rates of the same
    seed, so antenna gains cancel and only the propagation change remains.
    """
    drops = {}
    sinr_drops = {}
    for topo in (1, 3):
        d_all, s_all = [], []
        for seed in SEEDS:
            a = campaigns[("rain", topo, 0.0, seed)]
            b = campaigns[("rain", topo, 30.0, seed)]
            d_all.append((a["snr_dl"] - b["snr_dl"]).ravel())
            sa, sb = a["sinr_dl"], b["sinr_dl"]
            ok = np.isfinite(sa) & np.isfinite(sb)
            s_all.append((sa - sb)[ok])
        drops[topo] = float(np.median(np.concatenate(d_all)))
        sinr_drops[topo] = float(np.median(np.concatenate(s_all)))

    assert drops[1] >= 10.0
    assert drops[3] < drops[1]
    assert sinr_drops[3] <= 1.0

    medians = []
    for rain in RAINS:
        vals = np.concatenate([campaigns[("rain", 3, rain, seed)]["interference_values"] for seed in SEEDS])
        medians.append(float(np.median(vals)))
    assert medians[0] > medians[1] > medians[2]
    _ok(
        "rain-vs-topology trend",
        f"median SNR drop: star {drops[1]:.3f} dB >= 10, depth-3 {drops[3]:.3f} dB; "
        f"depth-3 median SINR drop {sinr_drops[3]:.3f} dB <= 1; "
        f"median interference {medians[0]:.1f} -> {medians[1]:.1f} -> {medians[2]:.1f} dBm",
    )


def test_delivery_vs_rate_capacity(campaigns):
    """DL PDR never grows with the source rate; two donors carry 100 Mb/s."""
    pdr = {}
    for topo in (1, 2, 3, 4):
        series = [
            _pooled_pdr(campaigns, [("cap", topo, rate, s) for s in SEEDS], "dl") for rate in RATES_MBPS
        ]
        pdr[topo] = series
        assert all(a >= b - 1e-12 for a, b in zip(series, series[1:])), (topo, series)
    for rate in (60, 80, 100):
        idx = RATES_MBPS.index(rate)
        assert pdr[4][idx] >= 0.95
    detail = "; ".join(
        f"topo{t}: " + "/".join(f"{v:.3f}" for v in series) for t, series in sorted(pdr.items())
    )
    _ok("capacity trend", detail)


def test_slot_pattern_tradeoff(campaigns):
    """More DL slots help the DL direction and starve the UL, and vice versa."""
    dl_4 = _pooled_pdr(campaigns, [("pat", "4DS2U", s) for s in SEEDS], "dl")
    dl_3 = _pooled_pdr(campaigns, [("pat", "3DS2U", s) for s in SEEDS], "dl")
    ul_4 = _pooled_pdr(campaigns, [("pat", "4DS2U", s) for s in SEEDS], "ul")
    ul_3 = _pooled_pdr(campaigns, [("pat", "3DS2U", s) for s in SEEDS], "ul")
    assert dl_4 > dl_3
    assert ul_4 < ul_3
    _ok(
        "slot-pattern trend",
        f"DL PDR {dl_4:.6f} (4DS2U) > {dl_3:.6f} (3DS2U); UL PDR {ul_4:.6f} (4DS2U) < {ul_3:.6f} (3DS2U)",
    )


def test_odd_symbol_share_bottleneck(campaigns):
    """Starving the donor's symbol share blows up the DL latency."""
    med = {}
    for ns in (4, 6, 8):
        lat = np.concatenate([campaigns[("ns", ns, s)]["dl_latency_s"] for s in SEEDS])
        med[ns] = float(np.median(lat)) * 1e3
    assert med[4] < med[6] < med[8]
    assert med[8] >= 10.0 * med[4]
    _ok(
        "odd-symbol bottleneck",
        f"median DL latency {med[4]:.3f} < {med[6]:.3f} < {med[8]:.3f} ms; ratio {med[8] / med[4]:.0f}x >= 10x",
    )


def test_fdm_matches_balanced_tdm(campaigns):
    """A balanced subband split performs like the even 6/6 symbol split."""
    worst = 0.0
    details = []
    for rate in RATES_MBPS:
        fdm = _pooled_pdr(campaigns, [("fdm", rate, s) for s in SEEDS], "dl")
        tdm = _pooled_pdr(campaigns, [("cap", 3, rate, s) for s in SEEDS], "dl")
        worst = max(worst, abs(fdm - tdm))
        details.append(f"{rate}: {fdm:.3f}/{tdm:.3f}")
        assert abs(fdm - tdm) <= 0.1
    _ok("fdm-tdm parity", f"max |PDR gap| {worst:.4f} <= 0.1 ({'; '.join(details)})")


def test_byte_identical_reruns(tmp_path):
    """Identical flags and seed reproduce the CSVs byte for byte."""
    flags = ["run", "--topology", "2", "--rain", "15", "--dl-rate", "80", "--seed", "99", "--duration", "0.25"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(flags + ["--out", str(out_a)]) == 0
    assert cli.main(flags + ["--out", str(out_b)]) == 0
    for rel in ("campaign.csv", "point000/run000/links.csv", "point000/run000/packets.csv", "point000/run000/summary.csv"):
        assert filecmp.cmp(out_a / rel, out_b / rel, shallow=False), rel
    _ok("determinism", "two identical invocations produced byte-identical CSV bundles")


def test_invariant_suite(campaigns):
    """Half duplex, packet conservation and downstream descent everywhere."""
    runs = 0
    for key, ext in campaigns.items():
        assert ext["half_duplex_violations"] == 0, key
        assert ext["depth_violations"] == 0, key
        c = ext["counts"]
        assert c["generated"] == c["delivered"] + c["dropped_overflow"] + c["dropped_no_route"] + c["in_flight"], key
        runs += 1
    _ok("invariant suite", f"{runs} runs: half-duplex clean, conservation exact, DL hops descend")
