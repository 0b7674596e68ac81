"""Regenerate the fixture CSVs and golden images used by the test suite.

The fixtures are hand-rolled miniature campaign bundles that conform to the
simulator's CSV interface; values are synthetic but shaped like real output
(SNR falls with rain, PDR falls with rate).  Run from the package root:

    python tools/make_goldens.py
"""

import csv
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from seahaul_plots import figures  # noqa: E402
from seahaul_plots.readers import CAMPAIGN_COLUMNS, CURVES_COLUMNS, SUMMARY_COLUMNS  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "tests", "fixtures")
GOLDEN = os.path.join(HERE, "..", "tests", "golden")


def summary_rows(scenario: str, rain: float, rate_mbps: float, run: int):
    """Synthetic but plausible per-run summary rows."""
    base_snr = 52.0 - (8.0 if scenario == "topology1" else 0.0)
    snr = base_snr - 0.33 * rain - 0.1 * run
    sinr = snr - (1.0 if scenario == "topology1" else 12.0 - 0.2 * rain)
    congestion = max(0.0, (rate_mbps - 80.0) / 100.0) * (0.8 if scenario == "topology4" else 1.0)
    pdr_dl = round(max(0.3, 1.0 - congestion), 4)
    pdr_ul = round(max(0.4, 1.0 - congestion / 2), 4)
    lat_dl = 0.5 + 400.0 * congestion + 0.05 * run
    lat_ul = 0.4 + 150.0 * congestion

    def lat_cols(med):
        return {
            "latency_min_ms": round(med * 0.5, 3),
            "latency_p25_ms": round(med * 0.8, 3),
            "latency_p50_ms": round(med, 3),
            "latency_p75_ms": round(med * 1.6, 3),
            "latency_max_ms": round(med * 8.0, 3),
        }

    rows = []
    for direction, pdr, lat in (("dl", pdr_dl, lat_dl), ("ul", pdr_ul, lat_ul)):
        generated = 100000
        row = {c: "" for c in SUMMARY_COLUMNS}
        row.update(kind="direction", id="", direction=direction, generated=generated)
        row.update(delivered=int(generated * pdr), dropped_overflow=0, dropped_no_route=0)
        row.update(in_flight=generated - int(generated * pdr), pdr=pdr)
        row.update(offered_bits=generated * 3000, carried_bits=int(generated * pdr) * 3000)
        row.update({k: v for k, v in lat_cols(lat).items()})
        rows.append(row)
    for direction in ("dl", "ul"):
        row = {c: "" for c in SUMMARY_COLUMNS}
        row.update(kind="links", id="", direction=direction, n_link_samples=70000)
        row.update(
            snr_min_db=round(snr - 12, 3),
            snr_p25_db=round(snr - 4, 3),
            snr_p50_db=round(snr, 3),
            snr_p75_db=round(snr + 2, 3),
            snr_max_db=round(snr + 5, 3),
            sinr_min_db=round(sinr - 14, 3),
            sinr_p25_db=round(sinr - 5, 3),
            sinr_p50_db=round(sinr, 3),
            sinr_p75_db=round(sinr + 2, 3),
            sinr_max_db=round(sinr + 4, 3),
        )
        if scenario != "topology1":
            row.update(
                interference_p25_dbm=round(-70 - rain / 3, 3),
                interference_p50_dbm=round(-62 - rain / 3, 3),
                interference_p75_dbm=round(-55 - rain / 3, 3),
                zero_interference_share=0.0,
            )
        else:
            row.update(zero_interference_share=1.0)
        rows.append(row)
    return rows


def write_campaign(root: str, points):
    os.makedirs(root, exist_ok=True)
    with open(os.path.join(root, "campaign.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CAMPAIGN_COLUMNS)
        for point_id, (scenario, rain, rate, runs) in enumerate(points):
            for run in range(runs):
                rel = os.path.join(f"point{point_id:03d}", f"run{run:03d}")
                os.makedirs(os.path.join(root, rel), exist_ok=True)
                with open(os.path.join(root, rel, "summary.csv"), "w", newline="") as sfh:
                    sw = csv.writer(sfh)
                    sw.writerow(SUMMARY_COLUMNS)
                    for row in summary_rows(scenario, rain, rate, run):
                        sw.writerow([row[c] for c in SUMMARY_COLUMNS])
                w.writerow(
                    [point_id, run, 1000 + run, scenario, rain, rate * 1e6, 0.2, "4DS2U", "tdm", 6, 2.0, rel]
                )


def write_curves(path: str):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVES_COLUMNS)
        for i in range(0, 2001, 5):
            d = 2000.0 + i
            fs = 87.4 + 20.0 * (d / 1000.0)
            import math

            classical = fs - 6.0 + 10.0 * math.cos(d / 40.0)
            modified = fs - 5.0 + 3.0 * math.cos(d / 400.0)
            w.writerow([d, round(fs, 4), round(classical, 4), round(modified, 4)])


def main():
    os.makedirs(FIXTURES, exist_ok=True)
    os.makedirs(GOLDEN, exist_ok=True)
    rain_points = [
        (scn, rain, 60.0, 2) for scn in ("topology1", "topology3") for rain in (0.0, 15.0, 30.0)
    ]
    rate_points = [
        (scn, 0.0, rate, 1) for scn in ("topology3", "topology4") for rate in (60.0, 100.0, 140.0)
    ]
    write_campaign(os.path.join(FIXTURES, "campaign_rain"), rain_points)
    write_campaign(os.path.join(FIXTURES, "campaign_rate"), rate_points)
    write_curves(os.path.join(FIXTURES, "curves.csv"))

    figures.plot_pl_curves(os.path.join(FIXTURES, "curves.csv"), os.path.join(GOLDEN, "pl_curves.png"))
    figures.plot_sinr_box(os.path.join(FIXTURES, "campaign_rain"), os.path.join(GOLDEN, "sinr_box.png"))
    figures.plot_pdr_bars(os.path.join(FIXTURES, "campaign_rate"), os.path.join(GOLDEN, "pdr_bars.png"))
    figures.plot_latency_box(os.path.join(FIXTURES, "campaign_rate"), os.path.join(GOLDEN, "latency_box.png"))
    print(f"fixtures in {os.path.normpath(FIXTURES)}, goldens in {os.path.normpath(GOLDEN)}")


if __name__ == "__main__":
    main()
