import init, { simulate_path, potential_profile, alpha_to_zero } from "./pkg/occuriesz_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function plot(canvas, series, { logx = false } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.ys.filter(Number.isFinite));
  const xs = series[0].xs.map((x) => (logx ? Math.log2(x) : x));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...all), Math.max(...all)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#555";
  ctx.fillText(y1.toPrecision(3), 2, pad);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    ctx.beginPath();
    s.ys.forEach((y, i) => {
      const px = sx(logx ? Math.log2(s.xs[i]) : s.xs[i]);
      if (s.dots) ctx.fillRect(px - 2, sy(y) - 2, 4, 4);
      else if (i === 0) ctx.moveTo(px, sy(y));
      else ctx.lineTo(px, sy(y));
    });
    if (!s.dots) ctx.stroke();
  }
}

function guarded(f) {
  return () => {
    $("status").textContent = "";
    try { f(); } catch (e) { $("status").textContent = String(e.message ?? e); }
  };
}

const steps = () => 2 ** num("nexp");

$("sim").onclick = guarded(() => {
  const ys = simulate_path(num("hurst"), steps(), BigInt(num("seed")));
  const xs = Array.from(ys, (_, i) => i / (ys.length - 1));
  plot($("path"), [{ xs, ys: Array.from(ys), color: "#333" }]);
});

$("prof").onclick = guarded(() => {
  const p = potential_profile(num("hurst"), steps(), BigInt(num("seed")), num("alpha"), num("points"));
  const xs = Array.from(p.xs);
  plot($("profile"), [
    { xs, ys: Array.from(p.histogram), color: "#d0782a" },
    { xs, ys: Array.from(p.potential), color: "#1f6fb2" },
  ]);
  p.free();
});

$("lim").onclick = guarded(() => {
  const s = alpha_to_zero(steps(), BigInt(num("seed")), num("t"), num("levels"));
  const xs = Array.from(s.alphas);
  plot($("limit"), [
    { xs, ys: Array.from(s.values), color: "#1f6fb2", dots: true },
    { xs, ys: xs.map(() => s.local_time), color: "#d0782a" },
  ], { logx: true });
  $("limtext").textContent =
    `extrapolated ${s.limit.toPrecision(4)}, histogram local time ${s.local_time.toPrecision(4)} (Brownian path)`;
  s.free();
});

await init();
$("sim").click();
