import init, { sample_brw, green_profile, capacity_curve } from "./pkg/brwcap_web.js";

const $ = (id) => document.getElementById(id);

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

// series: [{points: [[x, y, err?]], color}]
function plot(canvas, series, logX) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  const all = series.flatMap((s) => s.points);
  const fx = (x) => (logX ? Math.log2(x) : x);
  const xs = all.map((p) => fx(p[0]));
  const ys = all.flatMap((p) => [p[1] - (p[2] || 0), p[1] + (p[2] || 0)]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...ys), Math.max(...ys) * 1.05];
  const X = (x) => pad + ((fx(x) - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const Y = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);
  axes(ctx, w, h, pad);
  ctx.fillStyle = "#555";
  ctx.fillText(y1.toPrecision(3), 2, pad);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    ctx.beginPath();
    s.points.forEach((p, i) => (i ? ctx.lineTo(X(p[0]), Y(p[1])) : ctx.moveTo(X(p[0]), Y(p[1]))));
    ctx.stroke();
    for (const p of s.points) {
      ctx.fillRect(X(p[0]) - 2, Y(p[1]) - 2, 4, 4);
      if (p[2]) {
        ctx.beginPath();
        ctx.moveTo(X(p[0]), Y(p[1] - p[2]));
        ctx.lineTo(X(p[0]), Y(p[1] + p[2]));
        ctx.stroke();
      }
    }
  }
}

function drawTree(s) {
  const canvas = $("s-canvas");
  const ctx = canvas.getContext("2d");
  const xs = s.xy.filter((_, i) => i % 2 === 0);
  const ys = s.xy.filter((_, i) => i % 2 === 1);
  const [minx, maxx, miny, maxy] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const scale = Math.min((canvas.width - 20) / (maxx - minx + 1), (canvas.height - 20) / (maxy - miny + 1));
  const P = (i) => [10 + (xs[i] - minx + 0.5) * scale, 10 + (ys[i] - miny + 0.5) * scale];
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "rgba(30, 90, 160, 0.35)";
  ctx.beginPath();
  for (let i = 1; i < s.nodes; i++) {
    const [a, b] = P(s.parent[i]);
    const [c, d] = P(i);
    ctx.moveTo(a, b);
    ctx.lineTo(c, d);
  }
  ctx.stroke();
  ctx.fillStyle = "#c33";
  const [rx, ry] = P(0);
  ctx.fillRect(rx - 3, ry - 3, 6, 6);
}

function guard(f, out) {
  return () => {
    try {
      f();
    } catch (e) {
      $(out).textContent = String(e);
    }
  };
}

await init();

$("s-go").onclick = guard(() => {
  const s = sample_brw($("s-mu").value, $("s-theta").value, +$("s-n").value, BigInt($("s-seed").value));
  $("s-info").textContent = `${s.nodes} nodes, ${s.range_size} distinct sites in d = ${s.dim}; projection on the first two axes, root in red`;
  drawTree(s);
}, "s-info");

$("g-go").onclick = guard(() => {
  const rows = green_profile($("g-law").value, +$("g-rmax").value);
  const d = parseInt($("g-law").value.replace(/\D/g, ""), 10);
  // Scale by r^(d-2) so the asymptotic is flat.
  const k = (r) => Math.pow(r, d - 2);
  plot($("g-canvas"), [
    { points: rows.map((r) => [r.r, r.green * k(r.r)]), color: "#1a5aa0" },
    { points: rows.map((r) => [r.r, r.asymptotic * k(r.r)]), color: "#c33" },
  ], false);
  $("g-table").textContent = "r  G(r e1)  asymptotic  ratio\n" +
    rows.map((r) => `${r.r}  ${r.green.toExponential(5)}  ${r.asymptotic.toExponential(5)}  ${(r.green / r.asymptotic).toFixed(4)}`).join("\n");
}, "g-table");

$("c-go").onclick = guard(() => {
  const ns = new Uint32Array($("c-ns").value.split(",").map((x) => +x));
  const rows = capacity_curve("geometric", $("c-theta").value, ns, +$("c-reps").value, 1n);
  plot($("c-canvas"), [{ points: rows.map((r) => [r.n, r.mean_cap_over_n, r.std_error]), color: "#1a5aa0" }], true);
  $("c-table").textContent = "n  cap/n  se  |R|\n" +
    rows.map((r) => `${r.n}  ${r.mean_cap_over_n.toFixed(4)}  ${r.std_error.toFixed(4)}  ${r.mean_range_size.toFixed(1)}`).join("\n");
}, "c-table");
