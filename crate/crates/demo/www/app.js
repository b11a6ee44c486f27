// Built by `wasm-bindgen --target web` into ./pkg (see the project README).
import init, { bound_curves, potential_slice, verify } from "./pkg/regret_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const status = document.getElementById("status");

function plot(canvas, series, xs, opts = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 56, R = 12, T = 12, B = 32;
  ctx.clearRect(0, 0, W, H);
  const ys = series.flatMap(s => s.y).filter(Number.isFinite);
  let y0 = Math.min(...ys), y1 = Math.max(...ys);
  if (opts.floor !== undefined) y0 = Math.max(y0, opts.floor);
  if (y1 - y0 < 1e-9) { y0 -= 1; y1 += 1; }
  const pad = 0.05 * (y1 - y0);
  y0 -= pad; y1 += pad;
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = x => L + (x - x0) / (x1 - x0) * (W - L - R);
  const py = y => T + (y1 - y) / (y1 - y0) * (H - T - B);

  ctx.strokeStyle = "#999"; ctx.fillStyle = "#444"; ctx.font = "11px sans-serif";
  ctx.beginPath(); ctx.moveTo(L, T); ctx.lineTo(L, H - B); ctx.lineTo(W - R, H - B); ctx.stroke();
  for (let k = 0; k <= 4; k++) {
    const y = y0 + (y1 - y0) * k / 4;
    ctx.fillText(y.toPrecision(3), 4, py(y) + 4);
    const x = x0 + (x1 - x0) * k / 4;
    ctx.fillText(opts.integerX ? Math.round(x) : x.toFixed(1), px(x) - 8, H - B + 16);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color; ctx.lineWidth = s.width ?? 2;
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    let open = false;
    s.y.forEach((y, i) => {
      if (!Number.isFinite(y) || y < y0) { open = false; return; }
      open ? ctx.lineTo(px(xs[i]), py(y)) : ctx.moveTo(px(xs[i]), py(y));
      open = true;
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function guarded(fn) {
  return ev => {
    ev?.preventDefault();
    status.textContent = "";
    try { fn(); } catch (e) { status.textContent = String(e.message ?? e); }
  };
}

const drawCurves = guarded(() => {
  const f = new FormData(document.getElementById("curves-form"));
  const data = JSON.parse(bound_curves(+f.get("nmin"), +f.get("nmax"), Number(f.get("horizon"))));
  const series = data.curves.map((c, i) => ({ y: c.c_n, color: COLORS[i % COLORS.length], dash: c.direction === "lower" ? [6, 3] : [] }));
  plot(document.getElementById("curves"), series, data.n, { integerX: true, floor: 0 });
  document.getElementById("curves-legend").innerHTML = data.curves
    .map((c, i) => `<span style="--c:${COLORS[i % COLORS.length]}">${c.strategy} (${c.direction})</span>`)
    .join("");
});

const drawSlice = guarded(() => {
  const f = new FormData(document.getElementById("slice-form"));
  const data = JSON.parse(potential_slice(f.get("potential"), f.get("base"), +f.get("t"), +f.get("kappa"), -4, 4, 161));
  plot(document.getElementById("slice"), [
    { y: data.boundary, color: "#888", dash: [4, 4], width: 1.5 },
    { y: data.value, color: COLORS[0] },
  ], data.u);
});

const runVerify = guarded(() => {
  const f = new FormData(document.getElementById("verify-form"));
  const t0 = performance.now();
  const data = JSON.parse(verify(+f.get("n"), +f.get("horizon")));
  const rows = data.sandwiches.map(s => `<tr><td>${s.report.strategy}</td><td>${s.report.direction}</td>
    <td>${s.report.bound.toFixed(4)}</td><td>${s.dp_value.toFixed(4)}</td><td>${s.slack.toFixed(4)}</td>
    <td>${s.pass ? "holds" : "<b>fails</b>"}</td></tr>`);
  document.querySelector("#verify tbody").innerHTML = rows.join("");
  const bad = data.cross_pairs.filter(c => !c.pass).length;
  document.getElementById("verify-note").textContent =
    `${data.cross_pairs.length} adversary/player pairs compared, ${bad} out of order; ${(performance.now() - t0).toFixed(0)} ms.`;
});

await init();
document.getElementById("curves-form").addEventListener("submit", drawCurves);
document.getElementById("slice-form").addEventListener("submit", drawSlice);
document.getElementById("verify-form").addEventListener("submit", runVerify);
drawCurves(); drawSlice(); runVerify();
