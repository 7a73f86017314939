import init, { Volume, DemoTrainer, momentum_curve } from "./pkg/vcvrl_web.js";

const $ = (id) => document.getElementById(id);
const SCALE = 8;

function paint(canvas, rgba, height, width) {
  canvas.width = width;
  canvas.height = height;
  canvas.style.width = `${width * SCALE}px`;
  canvas.style.height = `${height * SCALE}px`;
  canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), width, height), 0, 0);
}

function chart(canvas, series, yMax) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 28;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 4, w - pad - 4, h - pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(yMax.toFixed(2), 2, 12);
  ctx.fillText("0", 14, h - pad + 4);
  series.forEach(({ values, colour, name }, s) => {
    if (values.length === 0) return;
    ctx.strokeStyle = colour;
    ctx.beginPath();
    values.forEach((v, i) => {
      const x = pad + ((w - pad - 4) * i) / Math.max(1, values.length - 1);
      const y = 4 + (h - pad) * (1 - Math.min(v, yMax) / yMax);
      i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    });
    ctx.stroke();
    ctx.fillStyle = colour;
    ctx.fillText(name, pad + 8 + s * 110, h - 8);
  });
}

// 1. volume explorer
let volume = null;

function drawVolume() {
  const z = Number($("v-slice").value);
  paint($("v-canvas"), volume.slice_rgba(z, $("v-label").checked), volume.height(), volume.width());
}

function generate() {
  try {
    volume?.free();
    volume = Volume.generate(BigInt($("v-seed").value), Number($("v-noise").value), Number($("v-branches").value));
    $("v-slice").max = volume.depth() - 1;
    $("v-stats").textContent =
      `${volume.depth()}×${volume.height()}×${volume.width()}, foreground ${(100 * volume.foreground_fraction()).toFixed(2)}%`;
    drawVolume();
  } catch (e) {
    $("v-stats").textContent = `error: ${e}`;
  }
}

// 2. training
let trainer = null;
let running = false;
let ce = [];
let sim = [];
let lastF1 = null;

function drawPrediction() {
  if (!trainer) return;
  paint($("t-pred"), trainer.prediction_rgba(Number($("t-slice").value)), trainer.height(), trainer.width());
}

function status(record) {
  const k = trainer.iteration();
  const parts = [`iteration ${k}/${trainer.total_iterations()}`];
  if (record) {
    parts.push(`L_CE ${record.loss_ce.toFixed(4)}`);
    if (record.loss_sim !== null) parts.push(`L_SIM ${record.loss_sim.toFixed(4)}`);
    if (record.alpha !== null) parts.push(`α ${record.alpha.toFixed(3)}`);
  }
  if (lastF1 !== null) parts.push(`val F1 ${lastF1.toFixed(3)}`);
  parts.push(`${trainer.parameter_count()} parameters`);
  $("t-stats").textContent = parts.join("  ");
}

function newRun() {
  running = false;
  trainer?.free();
  ce = [];
  sim = [];
  lastF1 = null;
  try {
    trainer = new DemoTrainer(7n, $("t-strategy").value, Number($("t-anchors").value), Number($("t-iters").value));
  } catch (e) {
    trainer = null;
    $("t-stats").textContent = `error: ${e}`;
    return;
  }
  $("t-slice").max = trainer.depth() - 1;
  $("a-slice").max = trainer.depth() - 1;
  $("t-run").disabled = false;
  $("t-run").textContent = "Run";
  $("a-draw").disabled = false;
  status(null);
  chart($("t-chart"), [], 1);
  drawPrediction();
  drawMomentum();
  drawAnchorsFresh();
}

function tick() {
  if (!running || !trainer) return;
  if (trainer.finished()) {
    running = false;
    $("t-run").textContent = "Done";
    $("t-run").disabled = true;
    return;
  }
  let record;
  try {
    record = JSON.parse(trainer.step());
  } catch (e) {
    running = false;
    $("t-stats").textContent = `error: ${e}`;
    return;
  }
  ce.push(record.loss_ce);
  if (record.loss_sim !== null) sim.push(record.loss_sim);
  const k = Number(trainer.iteration());
  if (k % 10 === 0 || trainer.finished()) {
    lastF1 = trainer.validation_f1();
    drawPrediction();
  }
  status(record);
  const yMax = Math.max(1, ...ce.slice(0, 3));
  chart($("t-chart"), [
    { values: ce, colour: "#1f77b4", name: "L_CE" },
    { values: sim, colour: "#d62728", name: "L_SIM" },
  ], yMax);
  setTimeout(tick, 0);
}

function toggleRun() {
  running = !running;
  $("t-run").textContent = running ? "Pause" : "Run";
  if (running) tick();
}

// 3. anchors and momentum
let view = null;

function drawAnchors() {
  if (!view || !trainer) return;
  const z = Number($("a-slice").value);
  paint($("a-canvas"), view.slice_rgba(z), trainer.height(), trainer.width());
  $("a-stats").textContent =
    `pool ${view.pool_size()} voxels, ${view.hard_count()} hard; drew ${view.from_pool()} from pool + ` +
    `${view.from_hard()} from hard subset${view.fallback() ? " (no hard voxels, fell back to random)" : ""}; ` +
    `${view.slice_count(z)} on this slice`;
}

function drawAnchorsFresh() {
  if (!trainer) return;
  try {
    view?.free();
    view = null;
    view = trainer.sample_anchors($("a-strategy").value, Number($("a-n").value), BigInt($("a-seed").value));
    drawAnchors();
  } catch (e) {
    $("a-stats").textContent = `error: ${e}`;
  }
}

function drawMomentum() {
  if (!trainer) return;
  const curve = Array.from(momentum_curve(trainer.total_iterations(), 1.0, 100));
  chart($("a-momentum"), [{ values: curve, colour: "#2ca02c", name: "momentum α over the run" }], 1);
}

await init();
$("v-generate").onclick = generate;
$("v-slice").oninput = drawVolume;
$("v-label").onchange = drawVolume;
$("t-new").onclick = newRun;
$("t-run").onclick = toggleRun;
$("t-slice").oninput = drawPrediction;
$("a-draw").onclick = drawAnchorsFresh;
$("a-slice").oninput = drawAnchors;
generate();
