import init, { modulusCurve, singleEstimate, monteCarlo } from "./pkg/mellin_deconv_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Draws each series as a polyline on shared axes.
function plot(canvas, xs, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 36;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => Array.from(s.y)).filter(Number.isFinite);
  let lo = opts.yMin ?? Math.min(...all), hi = Math.max(...all);
  if (hi === lo) hi = lo + 1;
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - lo) / (hi - lo)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
  ctx.fillText(lo.toPrecision(3), 2, h - pad);
  ctx.fillText(hi.toPrecision(3), 2, pad);
  ctx.fillText(String(+x0.toPrecision(3)), pad, h - pad + 14);
  ctx.fillText(String(+x1.toPrecision(3)), w - pad - 20, h - pad + 14);
  if (opts.marker !== undefined) {
    ctx.strokeStyle = "#bbb";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(px(opts.marker), pad / 2);
    ctx.lineTo(px(opts.marker), h - pad);
    ctx.stroke();
    ctx.setLineDash([]);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.y.forEach((y, i) => (i === 0 ? ctx.moveTo(px(xs[i]), py(y)) : ctx.lineTo(px(xs[i]), py(y))));
    ctx.stroke();
  }
}

function guard(out, f) {
  try {
    f();
  } catch (e) {
    $(out).textContent = "error: " + (e.message ?? e);
  }
}

function runModulus() {
  guard("mc-out", () => {
    const r = modulusCurve($("mc-kind").value, num("mc-p1"), num("mc-p2"), num("mc-c"), num("mc-tmax"));
    plot($("mc-plot"), r.t, [{ y: r.modulus, color: "#36c" }], { yMin: 0 });
    $("mc-out").textContent = `|M(0)| = ${r.modulus[0].toPrecision(6)}`;
  });
}

function runSingle() {
  guard("se-out", () => {
    const r = singleEstimate($("se-target").value, num("se-n"), num("se-m"), num("se-kappa"), num("se-k"), num("se-seed"));
    plot($("se-curve"), r.x, [
      { y: r.truth, color: "#333" },
      { y: r.estimate, color: "#c33" },
    ]);
    const ks = Array.from({ length: r.k_n }, (_, i) => i + 1);
    plot($("se-trace"), ks, [
      { y: r.trace_contrast, color: "#36c" },
      { y: r.trace_penalty, color: "#3a3" },
      { y: r.trace_objective, color: "#c33" },
    ], { marker: r.k_hat });
    $("se-out").textContent =
      `k̂ = ${r.k_hat}, k_n = ${r.k_n}, curve drawn at k = ${r.k_used}, ISE = ${r.ise.toExponential(3)}`;
  });
}

function runMonteCarlo() {
  $("mc2-out").textContent = "running...";
  // let the status text paint before the blocking call
  setTimeout(() => guard("mc2-out", () => {
    const r = monteCarlo($("mc2-target").value, num("mc2-n"), num("mc2-m"), num("mc2-kappa"), num("mc2-reps"), num("mc2-seed"));
    plot($("mc2-plot"), r.x, [
      { y: r.truth, color: "#333" },
      { y: r.median, color: "#c33" },
    ]);
    const counts = {};
    for (const k of r.k_hats) counts[k] = (counts[k] ?? 0) + 1;
    const hist = Object.entries(counts).map(([k, c]) => `${k}:${c}`).join(" ");
    $("mc2-out").textContent = `eMISE = ${r.emise.toExponential(3)} ± ${r.emise_se.toExponential(2)}   k̂ counts ${hist}`;
  }), 10);
}

await init();
$("mc-go").onclick = runModulus;
$("se-go").onclick = runSingle;
$("mc2-go").onclick = runMonteCarlo;
runModulus();
runSingle();
