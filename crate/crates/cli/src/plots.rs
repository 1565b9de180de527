//! Standalone matplotlib scripts that read a bundle's CSV files.

const PRELUDE: &str = r#"import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name), newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        sys.exit(name + " has no rows")
    return rows


def column(rows, key):
    return [float(r[key]) for r in rows]


def save(fig, name):
    path = os.path.join(HERE, name)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    print(path)
"#;

/// `(file name, body)` for time-series bundles. `dense` selects the
/// trajectory file over the per-measurement file.
fn series_script(name: &str, ylabel: &str, key: &str, log: bool, dense: bool) -> (String, String) {
    let source = if dense { "trajectory.csv" } else { "timeseries.csv" };
    let scale = if log { "ax.set_yscale(\"log\")\n" } else { "" };
    let body = format!(
        r#"{PRELUDE}
rows = load("{source}")
marks = load("timeseries.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
ys = [max(v, 1e-300) for v in column(rows, "{key}")] if {log} else column(rows, "{key}")
ax.plot(column(rows, "lambda_t"), ys, lw=1.2)
ax.plot(column(marks, "lambda_t"), [max(v, 1e-300) for v in column(marks, "{key}")] if {log} else column(marks, "{key}"), "o", ms=3)
{scale}ax.set_xlabel(r"$\lambda t$")
ax.set_ylabel(r"{ylabel}")
save(fig, "{name}.png")
"#,
        log = if log { "True" } else { "False" },
    );
    (format!("plot_{name}.py"), body)
}

pub fn timeseries_scripts(dense: bool) -> Vec<(String, String)> {
    vec![
        series_script("occupation", r"$\langle n\rangle$", "mean_n", true, dense),
        series_script("infidelity", r"$1-F$", "infidelity", true, dense),
        series_script("non_gaussianity", r"$\delta_G$", "delta_g", false, dense),
    ]
}

pub fn populations_script() -> (String, String) {
    let body = format!(
        r#"{PRELUDE}
rows = load("populations.csv")
steps = sorted({{int(r["step"]) for r in rows}})
shown = steps[:3]
fig, axes = plt.subplots(1, len(shown), figsize=(4 * len(shown), 3), sharey=True, squeeze=False)
for ax, s in zip(axes[0], shown):
    sub = [r for r in rows if int(r["step"]) == s][:30]
    ax.bar([int(r["n"]) for r in sub], [float(r["population"]) for r in sub])
    ax.set_title("after %d measurement(s)" % s)
    ax.set_xlabel("n")
axes[0][0].set_ylabel("P(n)")
save(fig, "populations.png")
"#
    );
    ("plot_populations.py".into(), body)
}

pub fn pulse_script() -> (String, String) {
    let body = format!(
        r#"{PRELUDE}
shape = load("pulse_shape.csv")
subs = load("subspaces.csv")
fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
a.plot(column(shape, "lambda_t"), column(shape, "omega_a"))
a.set_xlabel(r"$\lambda t$")
a.set_ylabel(r"$\omega_A(t)/\omega$")
b.semilogy([int(r["n"]) for r in subs], [max(1 - float(r["transfer"]), 1e-16) for r in subs], "o-")
b.set_xlabel("n")
b.set_ylabel(r"$1-|\langle e,n|\phi_n(\tau)\rangle|^2$")
save(fig, "pulse.png")
"#
    );
    ("plot_pulse.py".into(), body)
}

/// First swept column on the x axis, one line per value of the others.
pub fn sweep_script(axes: &[&str]) -> (String, String) {
    let x = axes.last().copied().unwrap_or("n_th");
    let groups: Vec<String> = axes[..axes.len().saturating_sub(1)].iter().map(|a| format!("\"{a}\"")).collect();
    let body = format!(
        r#"{PRELUDE}
rows = load("sweep.csv")
x_key = "{x}"
group_keys = [{groups}]
logx = x_key in ("gamma", "epsilon")
fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
groups = {{}}
for r in rows:
    groups.setdefault(tuple(r[k] for k in group_keys), []).append(r)
for label, sub in sorted(groups.items()):
    sub.sort(key=lambda r: float(r[x_key]))
    xs = column(sub, x_key)
    tag = ", ".join("%s=%s" % (k, float(v)) for k, v in zip(group_keys, label)) or None
    axes[0].plot(xs, [max(v, 1e-300) for v in column(sub, "final_mean_n")], "o-", label=tag)
    axes[1].plot(xs, [max(v, 1e-300) for v in column(sub, "min_mean_n")], "o-", label=tag)
    if "ss_mean_n" in sub[0]:
        axes[1].plot(xs, [max(v, 1e-300) for v in column(sub, "ss_mean_n")], "s--", label=(tag or "") + " SS")
for ax, title in zip(axes, [r"final $\langle n\rangle$", r"$\langle n\rangle_{{\min}}$"]):
    ax.set_yscale("log")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(x_key)
    ax.set_title(title)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=7)
save(fig, "sweep.png")
"#,
        groups = groups.join(", ")
    );
    ("plot_sweep.py".into(), body)
}
