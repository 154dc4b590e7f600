import json

import numpy as np
import pytest

from erelsel.dataio import (
    SynthSpec,
    generate_synthetic,
    load_dataset,
    read_contour,
    read_erel,
    read_report,
    read_results,
    write_dataset,
    write_plotdata,
    write_report,
    write_results,
)
from erelsel.ellipsefit import Ellipse
from erelsel.errors import InputError
from erelsel.masks import rasterize
from erelsel.metrics import aggregate, evaluate_frame
from erelsel.selection import PipelineConfig, gold_standard_index, select


@pytest.fixture
def synth_dir(tmp_path):
    samples = [generate_synthetic(SynthSpec(seed=s, artifact=a))
               for s, a in [(0, "none"), (1, "shadow_sector"), (2, "bifurcation_notch")]]
    samples[0].split = "train"
    path = write_dataset(tmp_path / "ds", samples)
    return path, samples


def test_roundtrip_masks_identical(synth_dir):
    path, samples = synth_dir
    loaded = load_dataset(path)
    assert [s.frame_id for s in loaded] == [s.frame_id for s in samples]
    for a, b in zip(samples, loaded):
        np.testing.assert_array_equal(a.frame.pixels, b.frame.pixels)
        for ma, mb in zip(a.masks(), b.masks()):
            np.testing.assert_array_equal(ma, mb)
        np.testing.assert_array_equal(a.ground_truth, b.ground_truth)
        assert (a.category, a.split, a.designed_index) == (b.category, b.split, b.designed_index)


def test_empty_manifest(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"frames": []}))
    assert load_dataset(p) == []


def test_missing_erel_file_named(synth_dir):
    path, _ = synth_dir
    doc = json.loads(path.read_text())
    doc["frames"][0]["erels"].append("nowhere/erel_x.txt")
    path.write_text(json.dumps(doc))
    with pytest.raises(InputError, match="erel_x.txt"):
        load_dataset(path)


def test_malformed_coordinate_names_line(tmp_path):
    f = tmp_path / "e.txt"
    f.write_text("# header\n1 2\n\n3 x\n")
    with pytest.raises(InputError, match=r"e\.txt:4"):
        read_erel(f)


def test_out_of_bounds_coordinate_names_line(tmp_path):
    f = tmp_path / "e.txt"
    f.write_text("1 2\n200 3\n")
    with pytest.raises(InputError, match=r"e\.txt:2"):
        read_erel(f, (128, 128))


def test_unknown_category_defaults_to_general(synth_dir):
    path, _ = synth_dir
    doc = json.loads(path.read_text())
    doc["frames"][0]["category"] = "calcified"
    path.write_text(json.dumps(doc))
    assert load_dataset(path)[0].category == "general"


def test_contour_header_optional(tmp_path):
    f = tmp_path / "gt.csv"
    f.write_text("x,y\n1.5,2\n3,4.25\n")
    np.testing.assert_array_equal(read_contour(f), [[1.5, 2.0], [3.0, 4.25]])
    f.write_text("1.5,2\n3,4.25\n")
    assert read_contour(f).shape == (2, 2)
    f.write_text("1.5,2\nfoo,4\n")
    with pytest.raises(InputError, match="gt.csv:2"):
        read_contour(f)


def test_png_frames_supported(tmp_path, synth_dir):
    from PIL import Image
    path, samples = synth_dir
    doc = json.loads(path.read_text())
    png = path.parent / "f.png"
    Image.fromarray(samples[0].frame.pixels).save(png)
    doc["frames"][0]["image"] = "f.png"
    path.write_text(json.dumps(doc))
    np.testing.assert_array_equal(load_dataset(path)[0].frame.pixels, samples[0].frame.pixels)


# synthetic generator

@pytest.mark.parametrize("artifact", ["none", "bifurcation_notch", "shadow_sector"])
def test_synthetic_nesting(artifact):
    for seed in range(10):
        s = generate_synthetic(SynthSpec(seed=seed, artifact=artifact))
        masks = s.masks()
        for a, b in zip(masks, masks[1:]):
            assert not (a & ~b).any()
            assert b.sum() > a.sum()


def test_synthetic_five_erels():
    s = generate_synthetic(SynthSpec(seed=3, n_inner=1, n_outer=2))
    assert len(s.erels) == 5 and s.designed_index == 1


def test_synthetic_gold_is_designed_lumen():
    for seed in range(10):
        s = generate_synthetic(SynthSpec(seed=seed))
        assert gold_standard_index(s) == s.designed_index


def test_synthetic_deterministic():
    a = generate_synthetic(SynthSpec(seed=42, artifact="shadow_sector"))
    b = generate_synthetic(SynthSpec(seed=42, artifact="shadow_sector"))
    assert a.frame.pixels.tobytes() == b.frame.pixels.tobytes()
    assert all(np.array_equal(x, y) for x, y in zip(a.erels, b.erels))
    c = generate_synthetic(SynthSpec(seed=43, artifact="shadow_sector"))
    assert a.frame.pixels.tobytes() != c.frame.pixels.tobytes()


def test_synthetic_fixed_lumen_validated():
    with pytest.raises(InputError):
        SynthSpec(lumen=Ellipse(10, 10, 20, 10, 0))
    s = generate_synthetic(SynthSpec(lumen=Ellipse(64, 64, 20, 15, 0.2)))
    lumen = s.masks()[s.designed_index]
    assert lumen.sum() == pytest.approx(np.pi * 20 * 15, rel=0.05)


def test_synthetic_intensity_levels():
    s = generate_synthetic(SynthSpec(seed=0))
    px = s.frame.pixels.astype(int)
    lumen = s.masks()[s.designed_index]
    assert abs(px[lumen].mean() - 30) < 2
    assert px.min() >= 20 and px.max() <= 130


# results and reports

def test_results_roundtrip(tmp_path, synth_dir):
    _, samples = synth_dir
    cfg = PipelineConfig(k_maxima=3)
    results = [select(s, cfg) for s in samples]
    write_results(tmp_path / "r.json", cfg, samples, results)
    cfg2, loaded = read_results(tmp_path / "r.json")
    assert cfg2 == cfg
    for s, r in zip(samples, results):
        assert loaded[s.frame_id].to_dict() == r.to_dict()


def test_results_malformed(tmp_path):
    p = tmp_path / "r.json"
    p.write_text("{}")
    with pytest.raises(InputError):
        read_results(p)


def test_report_json_roundtrip_and_plot_data(tmp_path, synth_dir):
    _, samples = synth_dir
    results = {s.frame_id: select(s) for s in samples}
    evals = [evaluate_frame(s, results[s.frame_id]) for s in samples]
    rep = aggregate(evals)
    write_report(rep, evals, tmp_path / "rep.json", results=results)
    rep2, evals2 = read_report(tmp_path / "rep.json")
    assert rep2 == rep
    assert evals2 == evals
    doc = json.loads((tmp_path / "rep.json").read_text())
    for s in samples:
        pd = doc["plot_data"][s.frame_id]
        assert len(pd["correlation"]["r"]) == len(s.erels)
        assert len(pd["compactness"]["total"]) == len(results[s.frame_id].pass1_survivors)


def test_report_csv_singleton(tmp_path, synth_dir):
    _, samples = synth_dir
    s = samples[0]
    evals = [evaluate_frame(s, select(s))]
    write_report(aggregate(evals), evals, tmp_path / "rep.csv")
    lines = (tmp_path / "rep.csv").read_text().strip().splitlines()
    assert lines[0] == "category,split,selector,n,hd_mean,hd_std,jm_mean,jm_std"
    rows = [l.split(",") for l in lines[1:]]
    cats = {(r[0], r[1]) for r in rows}
    assert ("no_artifact", "all") in cats
    assert all(float(r[5]) == 0.0 and float(r[7]) == 0.0 for r in rows)


def test_plotdata_files(tmp_path, synth_dir):
    _, samples = synth_dir
    results = {s.frame_id: select(s) for s in samples}
    paths = write_plotdata(tmp_path / "curves", results)
    assert len(paths) == len(samples)
    body = paths[0].read_text().strip().splitlines()
    assert len(body) - 1 == len(samples[0].erels)


def test_coords_rerasterize_identical(synth_dir, tmp_path):
    from erelsel.dataio import write_erel
    _, samples = synth_dir
    s = samples[1]
    m = s.masks()[2]
    write_erel(tmp_path / "e.txt", np.argwhere(m))
    back = rasterize(read_erel(tmp_path / "e.txt"), s.frame.width, s.frame.height)
    np.testing.assert_array_equal(back, m)


def test_dataset_stats(synth_dir):
    from erelsel.dataio import dataset_stats
    _, samples = synth_dir
    st = dataset_stats(samples)
    assert st["all"]["frames"] == 3
    assert st["all"]["total_erels"] == sum(len(s.erels) for s in samples)
    assert st["train"]["frames"] == 1
    assert st["train"]["min_erels"] == st["train"]["max_erels"] == len(samples[0].erels)
