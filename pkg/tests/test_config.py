import pytest

from renormfock.config import ConfigError, load_config, parse_config, summarize

BASE = """
# scalar source sweep
[grid]
dimension = 1
kind = log
nodes = 4
k_min = 0.4
k_max = 4.0

[truncation]
nmax = 3

[model]
name = vhm
form_factor = nelson_sharp
coupling = 0.4     # dimensionless
sigma = 4.0
sigma0 = 0.3

[sweep]
parameter = sigma
values = 1.0, 2.0

[solver]
tol = 1e-10
seed = 7
k_lowest = 3
"""


def test_minimal_config_round_trips():
    cfg = parse_config(BASE + "\n[output]\npath = out.csv\n")
    assert cfg.model == "vhm"
    assert cfg.grid["dimension"] == 1
    assert cfg.grid["kind"] == "log"
    assert cfg.grid["nodes"] == 4
    assert cfg.grid["k_min"] == 0.4
    assert cfg.grid["k_max"] == 4.0
    assert cfg.grid["mu"] == 0.0
    assert cfg.truncation["nmax"] == 3
    assert cfg.model_params["coupling"] == 0.4
    assert cfg.model_params["sigma"] == 4.0
    assert cfg.model_params["sigma0"] == 0.3
    assert cfg.sweep_param == "sigma"
    assert cfg.sweep_values == [1.0, 2.0]
    assert cfg.solver["tol"] == 1e-10
    assert cfg.solver["seed"] == 7
    assert cfg.solver["k_lowest"] == 3
    assert cfg.solver["max_iter"] == 5000
    assert cfg.output_path == "out.csv"


def test_defaults():
    cfg = parse_config(BASE)
    assert cfg.output_path is None
    assert cfg.solver["max_iter"] == 5000
    assert cfg.model_params["kernel"] == "regular"


def test_point_resolution():
    cfg = parse_config(BASE)
    assert cfg.point(1) == {"sigma": 2.0, "sigma0": 0.3, "nmax": 3,
                            "nodes": 4}
    cfg2 = parse_config(BASE.replace("parameter = sigma", "parameter = nmax")
                        .replace("values = 1.0, 2.0", "values = 2, 5"))
    assert cfg2.point(1)["nmax"] == 5
    assert cfg2.point(1)["sigma"] == 4.0


def test_modes_for_matches_grid_section():
    cfg = parse_config(BASE)
    ms = cfg.modes_for(4)
    assert len(ms) == 4
    assert ms.grid_kind == "logarithmic"


def test_load_config_reads_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(BASE, encoding="utf-8")
    cfg = load_config(str(p))
    assert "sweep sigma over [1, 2]" in summarize(cfg)


def test_sb_config_builds_spin():
    text = BASE.replace(
        "name = vhm",
        "name = sb\nA = 0, 1, 1, 0\nB = 1, 0, 0, -1\nkernel = singular")
    cfg = parse_config(text)
    spin = cfg.spin()
    assert spin.dim == 2
    assert cfg.model_params["kernel"] == "singular"
    assert cfg.model_params["A"] == [0, 1, 1, 0]


@pytest.mark.parametrize("mangle,match", [
    (lambda t: t.replace("[grid]", "[mesh]"), "unknown section"),
    (lambda t: t.replace("k_max = 4.0", "k_max = 4.0\nflux = 3"),
     "unknown key"),
    (lambda t: "tol = 3\n" + t, "outside any"),
    (lambda t: t + "\n[solver]\ntol\n", "key = value"),
    (lambda t: t.replace("k_min = 0.4", "k_min = fast"), "must be a number"),
    (lambda t: t.replace("nmax = 3", "nmax = 2.5"), "must be an integer"),
    (lambda t: t.replace("name = vhm", "name = polaron"), "unknown model"),
    (lambda t: t.replace("kind = log", "kind = cubic"), "log or linear"),
    (lambda t: t.replace("parameter = sigma", "parameter = coupling"),
     "sweep parameter"),
    (lambda t: t.replace("values = 1.0, 2.0", "values = ,"),
     "must not be empty"),
    (lambda t: t.replace("name = vhm",
                         "name = sb\nA = 0,1,oops,0\nB = 1,0,0,-1"),
     "complex numbers"),
    (lambda t: t.replace("name = vhm\n", ""), r"\[model\] name is required"),
    (lambda t: t.replace("nodes = 4\n", ""), r"\[grid\] nodes is required"),
    (lambda t: t.replace("dimension = 1", "dimension = 2"),
     "dimension must be 1 or 3"),
    (lambda t: t.replace("k_min = 0.4", "k_min = 9.0"), "k_min < k_max"),
    (lambda t: t.replace("k_min = 0.4", "k_min = 0")
     .replace("kind = log", "kind = log"), "log spacing"),
    (lambda t: t.replace("k_max = 4.0", "k_max = 4.0\nmu = -1"),
     "mu must be nonnegative"),
    (lambda t: t.replace("nmax = 3\n", ""), r"\[truncation\] nmax"),
    (lambda t: t.replace("nmax = 3", "modes = 3\nnmax = 3"),
     "every grid node is a mode"),
    (lambda t: t.replace("parameter = sigma\n", ""),
     "both parameter and values"),
    (lambda t: t.replace("form_factor = nelson_sharp",
                         "form_factor = gaussian"), "form_factor must be"),
    (lambda t: t.replace("coupling = 0.4", "coupling = 0.4\nP = 1.0"),
     "does not apply"),
    (lambda t: t.replace("name = vhm", "name = sb"), "both A and B"),
    (lambda t: t.replace("name = vhm", "name = sb\nA = 0,1,1\nB = 1,0,0,-1"),
     "square matrix"),
    (lambda t: t.replace("name = vhm",
                         "name = sb\nA = 0,1,1,0\nB = " + "0," * 8 + "1"),
     "equal size"),
    (lambda t: t.replace("name = vhm",
                         "name = sb\nA = " + "0," * 80 + "0\nB = "
                         + "0," * 80 + "0"), "capped at 8"),
    (lambda t: t.replace("name = vhm",
                         "name = sb\nA = 0,1,1,0\nB = 1,1,0,1"), "normal"),
    (lambda t: t.replace("name = vhm",
                         "name = sb\nA = 0,1,0,0\nB = 1,0,0,-1"),
     "Hermitian"),
    (lambda t: t.replace("values = 1.0, 2.0", "values = 1.0, 0.2"),
     "sweep point 1"),
    (lambda t: t.replace("parameter = sigma", "parameter = nmax")
     .replace("values = 1.0, 2.0", "values = 2, -1"),
     "nonnegative integer"),
    (lambda t: t.replace("tol = 1e-10", "tol = 0"), "tol must be positive"),
    (lambda t: t.replace("k_lowest = 3", "k_lowest = 0"), "k_lowest"),
    (lambda t: t + "\n[solver]\nmax_iter = 0\n", "max_iter"),
])
def test_rejections(mangle, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(mangle(BASE))


def test_nelson_fiber_needs_finite_sigma():
    text = (BASE.replace("name = vhm", "name = nelson-fiber\nP = 0.0")
            .replace("sigma = 4.0\n", "")
            .replace("parameter = sigma", "parameter = sigma0")
            .replace("values = 1.0, 2.0", "values = 0.1"))
    with pytest.raises(ConfigError, match="finite sigma"):
        parse_config(text)


def test_error_messages_carry_line_numbers():
    with pytest.raises(ConfigError, match="line 8"):
        parse_config(BASE.replace("k_max = 4.0", "k_max = oops"))
