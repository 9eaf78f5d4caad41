import init, { potential_curve, phi_scan_eigenfunction, Simulation } from "./pkg/fhmin_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function fail(target, err) {
  target.textContent = String(err.message ?? err);
  target.classList.add("error");
}

// Line plot of several series over common x values, y clipped to [ymin, ymax].
function plot(canvas, xs, series, ymin, ymax, marks = []) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => ((x - x0) / (x1 - x0)) * w;
  const py = (y) => h - ((y - ymin) / (ymax - ymin)) * h;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.moveTo(0, py(0)); ctx.lineTo(w, py(0));
  ctx.moveTo(px(0), 0); ctx.lineTo(px(0), h);
  ctx.stroke();
  for (const { ys, color } of series) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    let pen = false;
    xs.forEach((x, i) => {
      const y = ys[i];
      if (!Number.isFinite(y) || y > ymax + 3 * (ymax - ymin) || y < ymin - 3 * (ymax - ymin)) { pen = false; return; }
      if (pen) ctx.lineTo(px(x), py(y)); else ctx.moveTo(px(x), py(y));
      pen = true;
    });
    ctx.stroke();
  }
  ctx.strokeStyle = "#0a0";
  ctx.setLineDash([4, 4]);
  for (const m of marks) {
    ctx.beginPath(); ctx.moveTo(px(m), 0); ctx.lineTo(px(m), h); ctx.stroke();
  }
  ctx.setLineDash([]);
}

function drawPotential() {
  const info = $("pot-info");
  info.classList.remove("error");
  try {
    const c = potential_curve(num("pot-theta"), num("pot-c"), 1.5, 601);
    const u = c.u(), w = c.w(), wm = c.w_mod();
    plot($("pot-canvas"), u, [{ ys: wm, color: "#d33" }, { ys: w, color: "#33d" }], 0, 1.2,
      [c.u_theta, -c.u_theta, c.u_hat, -c.u_hat]);
    info.textContent = `blue W, red modified W\nu_theta = ${c.u_theta.toFixed(6)}  u_hat = ${c.u_hat.toFixed(6)}  k = ${c.order}`;
    c.free();
  } catch (e) { fail(info, e); }
}

let sim = null;
let running = false;

function drawField() {
  const side = sim.side;
  const img = new ImageData(new Uint8ClampedArray(sim.rgba()), side, side);
  const off = new OffscreenCanvas(side, side);
  off.getContext("2d").putImageData(img, 0, 0);
  const ctx = $("sim-canvas").getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, $("sim-canvas").width, $("sim-canvas").height);
  $("sim-info").textContent =
    `t = ${sim.time.toFixed(2)}  dt = ${sim.dt.toExponential(2)}\n` +
    `max u = ${sim.max_u.toFixed(6)}  E = ${sim.energy().toFixed(6)}\n` +
    `residual = ${sim.residual.toExponential(2)}  ${sim.classification()}`;
}

function frame() {
  if (!running) return;
  try {
    const steps = Math.max(1, Math.round(0.5 / sim.dt));
    const res = sim.advance(steps);
    drawField();
    if (res < 1e-7 && sim.time >= 50) { pause(); $("sim-info").textContent += "\nequilibrium reached"; return; }
  } catch (e) { pause(); fail($("sim-info"), e); return; }
  requestAnimationFrame(frame);
}

function pause() {
  running = false;
  $("sim-pause").disabled = true;
}

function start() {
  const info = $("sim-info");
  info.classList.remove("error");
  if (sim) sim.free();
  try {
    sim = new Simulation(num("sim-theta"), num("sim-kappa"), num("sim-n"), num("sim-seed"));
  } catch (e) { sim = null; fail(info, e); return; }
  running = true;
  $("sim-pause").disabled = false;
  drawField();
  requestAnimationFrame(frame);
}

function drawPhi() {
  const info = $("phi-info");
  info.classList.remove("error");
  try {
    const c = phi_scan_eigenfunction(num("phi-theta"), num("phi-kappa"), 2.0, 401);
    const s = c.s(), d = c.dphi();
    // scale to the part up to the bound so the negative dip stays visible
    const reach = Number.isFinite(c.bound) ? 1.2 * c.bound : s[s.length - 1];
    const top = Math.max(...Array.from(d).filter((v, i) => s[i] <= reach && Number.isFinite(v)).map(Math.abs), 1e-3);
    const marks = Number.isFinite(c.bound) ? [c.bound] : [];
    plot($("phi-canvas"), s, [{ ys: d, color: "#d33" }], -top, top, marks);
    const cross = s.find((_, i) => i > 0 && d[i - 1] < 0 && d[i] >= 0);
    info.textContent = `red dPhi/ds, green s_phi bound\n` +
      `s_phi = ${Number.isFinite(c.bound) ? c.bound.toFixed(6) : "none (kappa >= kappa_c)"}` +
      `  first sign change near s = ${cross === undefined ? "none" : cross.toFixed(3)}`;
    c.free();
  } catch (e) { fail(info, e); }
}

await init();
$("status").textContent = "ready";
$("pot-go").onclick = drawPotential;
$("sim-start").onclick = start;
$("sim-pause").onclick = pause;
$("phi-go").onclick = drawPhi;
drawPotential();
drawPhi();
