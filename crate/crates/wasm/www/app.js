import init, { decompose_matrix, cost_curves, csd_digits } from "./pkg/lcc_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

function fail(e) {
  $("error").textContent = String(e);
}

function num(v) {
  return v === "inf" ? Infinity : v;
}

// Line plot of several series of [x, y] points.
function plot(canvas, series, xLabel, yLabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 48;
  ctx.clearRect(0, 0, w, h);
  const pts = series.flatMap((s) => s.points).filter(([, y]) => Number.isFinite(y));
  if (pts.length === 0) return;
  const xs = pts.map((p) => p[0]), ys = pts.map((p) => p[1]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs) || 1];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText(xLabel, w / 2 - 30, h - 12);
  ctx.fillText(yLabel, 4, pad - 10);
  ctx.fillText(x0.toFixed(0), pad, h - pad + 14);
  ctx.fillText(x1.toFixed(0), w - pad - 30, h - pad + 14);
  ctx.fillText(y0.toFixed(1), 4, h - pad);
  ctx.fillText(y1.toFixed(1), 4, pad + 10);
  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    s.points.filter(([, y]) => Number.isFinite(y)).forEach(([x, y], j) => {
      j ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y));
    });
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(s.name, w - pad - 110, pad + 16 + 14 * i);
  });
}

function runDecompose() {
  $("error").textContent = "";
  try {
    const r = JSON.parse(decompose_matrix(
      $("matrix").value, $("algorithm").value, Number($("target").value),
      $("dmax").value, $("schedule").value));
    $("summary").textContent =
      `SQNR ${r.sqnr_db === "inf" ? "inf" : r.sqnr_db.toFixed(2)} dB, ` +
      `${r.n_add} adders, ${r.n_delay} latches, ${r.n_inv} inverters, ` +
      `depth ${r.depth}, total cost ${r.cost_total} (${r.stop})`;
    $("dot").textContent = r.dot;
    $("json").textContent = JSON.stringify(r.dag, null, 1);
    const traj = r.trajectory.map((s) => [s.cost_total, num(s.sqnr_db)]);
    plot($("trajectory"), [{ name: "SQNR per step", points: traj }], "total cost", "SQNR dB");
  } catch (e) { fail(e); }
}

function runCurves() {
  $("error").textContent = "";
  try {
    const r = JSON.parse(cost_curves(
      Number($("rows").value), Number($("cols").value), Number($("trials").value),
      BigInt($("seed").value), $("targets").value));
    const key = $("total").checked ? "total" : "adders";
    const series = r.series.map((s) => ({
      name: s.name,
      points: s.points.map((p) => [p[key], num(p.sqnr_db)]),
    }));
    plot($("curve"), series, key === "total" ? "total cost" : "adders", "mean SQNR dB");
  } catch (e) { fail(e); }
}

function runCsd() {
  $("error").textContent = "";
  try {
    const r = JSON.parse(csd_digits(Number($("value").value), Number($("digits").value)));
    $("csdout").textContent = r.steps
      .map((s, i) => `${i + 1} digit(s): ${s.digits.join(" ")} = ${s.approx}  |error| ${s.error.toExponential(3)}`)
      .join("\n");
  } catch (e) { fail(e); }
}

await init();
$("run").onclick = runDecompose;
$("sweep").onclick = runCurves;
$("digitsrun").onclick = runCsd;
runDecompose();
runCsd();
