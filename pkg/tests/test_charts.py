"""Chart rendering: panel/threshold structure and determinism."""

import numpy as np

from olppmon.charts import render_monitoring_chart
from olppmon.monitoring import DetectionRecord


def make_records(n=50, seed=0):
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        t2 = float(rng.uniform(0.1, 5.0))
        spe = float(rng.uniform(0.0, 1.0))
        records.append(DetectionRecord(index=i, t2=t2, spe=spe,
                                       t2_alarm=t2 > 4.0, spe_alarm=spe > 0.9,
                                       verdict="faulty" if t2 > 4.0 or spe > 0.9
                                       else "normal"))
    return records


def test_two_panels_two_thresholds(tmp_path):
    path = tmp_path / "chart.svg"
    render_monitoring_chart(make_records(), 4.0, 0.9, path)
    svg = path.read_text()
    assert svg.count('id="axes_') == 2
    assert svg.count('id="threshold-t2"') == 1
    assert svg.count('id="threshold-spe"') == 1


def test_inactive_spe_renders_without_second_threshold(tmp_path):
    path = tmp_path / "chart.svg"
    render_monitoring_chart(make_records(), 4.0, None, path)
    svg = path.read_text()
    assert svg.count('id="axes_') == 2
    assert 'id="threshold-t2"' in svg
    assert 'id="threshold-spe"' not in svg


def test_log_scale_and_title(tmp_path):
    path = tmp_path / "chart.svg"
    render_monitoring_chart(make_records(), 4.0, 0.9, path, log_scale=True,
                            title="fault 1")
    assert path.exists() and path.stat().st_size > 0


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    render_monitoring_chart(make_records(seed=3), 4.0, 0.9, a)
    render_monitoring_chart(make_records(seed=3), 4.0, 0.9, b)
    assert a.read_bytes() == b.read_bytes()
