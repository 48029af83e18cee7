import init, { workload_curve, metrics_curve, simulate } from "./pkg/redundancy_wasm.js";

const form = document.getElementById("params");
const errorBox = document.getElementById("error");

function threshold(value) {
  return value === "" ? Infinity : Number(value);
}

function readParams() {
  const f = new FormData(form);
  return {
    lambda: Number(f.get("lambda")),
    mu: Number(f.get("mu")),
    d: Number(f.get("d")),
    p: Number(f.get("p")),
    t1: threshold(f.get("t1")),
    t2: threshold(f.get("t2")),
  };
}

function axes(ctx, w, h, pad) {
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

function polyline(ctx, xs, ys, color, sx, sy) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  let pen = false;
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(ys[i])) { pen = false; continue; }
    const x = sx(xs[i]), y = sy(ys[i]);
    if (pen) ctx.lineTo(x, y); else ctx.moveTo(x, y);
    pen = true;
  }
  ctx.stroke();
  ctx.lineWidth = 1;
}

function label(ctx, text, x, y) {
  ctx.fillStyle = "#444";
  ctx.fillText(text, x, y);
}

function drawCdf(p) {
  const canvas = document.getElementById("cdf");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  const wMax = Math.max(4, 2 * (Number.isFinite(p.t1) ? p.t1 : 4 / p.mu));
  const n = 200;
  const data = workload_curve(p.lambda, p.mu, p.d, p.p, p.t1, p.t2, wMax, n);
  const xs = [], ys = [];
  for (let i = 0; i < n; i++) { xs.push(data[2 * i]); ys.push(data[2 * i + 1]); }
  const sx = (x) => pad + (x / wMax) * (w - 2 * pad);
  const sy = (y) => h - pad - y * (h - 2 * pad);
  axes(ctx, w, h, pad);
  polyline(ctx, xs, ys, "#1f77b4", sx, sy);
  label(ctx, "1", 10, sy(1) + 4);
  label(ctx, "0", 10, sy(0) + 4);
  label(ctx, wMax.toFixed(1), w - pad - 10, h - 12);
  label(ctx, "w", w / 2, h - 12);
  document.getElementById("cdf-info").textContent =
    `P(W = 0) = ${data[2 * n].toFixed(4)}, E[W] = ${data[2 * n + 1].toFixed(4)}`;
}

function drawMetrics(p) {
  const canvas = document.getElementById("metrics");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  const lamMax = Number.isFinite(p.t1) ? 2 * p.mu : 0.99 * p.mu;
  const n = 100;
  const data = metrics_curve(p.mu, p.d, p.p, p.t1, p.t2, lamMax / n, lamMax, n);
  const lam = [], tau = [], loss = [];
  for (let i = 0; i < n; i++) {
    lam.push(data[3 * i]);
    tau.push(data[3 * i + 1]);
    loss.push(data[3 * i + 2]);
  }
  const finite = tau.filter(Number.isFinite);
  const tauMax = Math.min(Math.max(...finite, 1e-9), 20 / p.mu);
  const sx = (x) => pad + (x / lamMax) * (w - 2 * pad);
  const syTau = (y) => h - pad - Math.min(y / tauMax, 1) * (h - 2 * pad);
  const syLoss = (y) => h - pad - y * (h - 2 * pad);
  axes(ctx, w, h, pad);
  polyline(ctx, lam, tau, "#1f77b4", sx, syTau);
  polyline(ctx, lam, loss, "#d62728", sx, syLoss);
  label(ctx, tauMax.toFixed(2), 2, pad);
  label(ctx, "1", w - pad + 6, pad);
  label(ctx, lamMax.toFixed(2), w - pad - 10, h - 12);
  label(ctx, "λ", w / 2, h - 12);
  ctx.strokeStyle = "#aaa";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(sx(p.lambda), pad);
  ctx.lineTo(sx(p.lambda), h - pad);
  ctx.stroke();
  ctx.setLineDash([]);
}

function redraw() {
  errorBox.textContent = "";
  try {
    const p = readParams();
    drawCdf(p);
    drawMetrics(p);
  } catch (e) {
    errorBox.textContent = String(e.message ?? e);
  }
}

function runSimulation() {
  errorBox.textContent = "";
  const out = document.getElementById("sim-out");
  try {
    const p = readParams();
    const n = Number(document.getElementById("n-servers").value);
    const arrivals = Number(document.getElementById("n-arrivals").value);
    const seed = Number(document.getElementById("seed").value);
    const r = simulate(p.lambda, p.mu, n, p.d, p.p, p.t1, p.t2, arrivals, 10, seed);
    const fmt = (x) => (Number.isFinite(x) ? x.toPrecision(5) : "n/a");
    out.textContent =
      `simulated tau   ${fmt(r[0])} +/- ${fmt(r[1])}\n` +
      `simulated P_L   ${fmt(r[2])} +/- ${fmt(r[3])}\n` +
      `analytic  tau   ${fmt(r[4])}\n` +
      `analytic  P_L   ${fmt(r[5])}`;
  } catch (e) {
    errorBox.textContent = String(e.message ?? e);
  }
}

await init();
form.addEventListener("input", redraw);
document.getElementById("run-sim").addEventListener("click", runSimulation);
redraw();
