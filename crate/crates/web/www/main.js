import init, { orbits, closeness, classify, catalog } from "./pkg/flowsep_web.js";

const $ = (id) => document.getElementById(id);

function drawOrbits() {
  const r = Number($("o-r").value);
  const a = Number($("o-a").value);
  const t = Number($("o-t").value);
  $("o-label").textContent = `r = ${r.toFixed(2)}, t = ${t.toFixed(1)}`;
  const data = JSON.parse(orbits(r, a, t, 400));
  const cv = $("o-canvas");
  const g = cv.getContext("2d");
  const scale = cv.width / 4.6;
  const cx = cv.width / 2, cy = cv.height / 2;
  g.clearRect(0, 0, cv.width, cv.height);
  g.strokeStyle = "#bbb";
  for (const rad of [1, 2]) {
    g.beginPath();
    g.arc(cx, cy, rad * scale, 0, 2 * Math.PI);
    g.stroke();
  }
  const colours = { "annulus-phi": "#1f5fbf", "annulus-psi": "#c0392b" };
  for (const [name, pts] of Object.entries(data)) {
    g.strokeStyle = colours[name];
    g.lineWidth = 2;
    g.beginPath();
    pts.forEach(([x, y], i) => {
      const px = cx + x * scale, py = cy - y * scale;
      i === 0 ? g.moveTo(px, py) : g.lineTo(px, py);
    });
    g.stroke();
    const [ex, ey] = pts[pts.length - 1];
    g.fillStyle = colours[name];
    g.beginPath();
    g.arc(cx + ex * scale, cy - ey * scale, 4, 0, 2 * Math.PI);
    g.fill();
  }
}

function drawCloseness() {
  const cv = $("c-canvas");
  const g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  let data;
  try {
    data = JSON.parse(closeness($("c-sys").value, $("c-x").value, $("c-y").value, Number($("c-h").value), 800));
  } catch (e) {
    $("c-sup").textContent = e.message;
    return;
  }
  $("c-sup").textContent = `sup = ${data.sup.toPrecision(6)}`;
  const top = Math.max(data.sup, 1e-9) * 1.1;
  const n = data.t.length;
  g.strokeStyle = "#ddd";
  g.beginPath();
  g.moveTo(cv.width / 2, 0);
  g.lineTo(cv.width / 2, cv.height);
  g.stroke();
  g.strokeStyle = "#1f5fbf";
  g.beginPath();
  data.d.forEach((d, i) => {
    const px = (i / (n - 1)) * cv.width;
    const py = cv.height - (d / top) * cv.height;
    i === 0 ? g.moveTo(px, py) : g.lineTo(px, py);
  });
  g.stroke();
}

function runClassify() {
  $("k-out").textContent = "running…";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const res = JSON.parse(classify($("k-sys").value, $("k-prop").value, $("k-over").value));
      const ms = (performance.now() - t0).toFixed(0);
      $("k-out").textContent = `${res.summary}\n(${ms} ms)` + (res.witness ? `\n\n${res.witness}` : "");
    } catch (e) {
      $("k-out").textContent = `error: ${e.message}`;
    }
  }, 10);
}

await init();
$("status").textContent = "";
for (const sel of ["c-sys", "k-sys"]) {
  for (const name of JSON.parse(catalog())) {
    const o = document.createElement("option");
    o.textContent = name;
    $(sel).appendChild(o);
  }
}
$("c-sys").value = "annulus-psi";
$("k-sys").value = "annulus-psi";
for (const id of ["o-r", "o-a", "o-t"]) $(id).addEventListener("input", drawOrbits);
$("c-go").addEventListener("click", drawCloseness);
$("k-go").addEventListener("click", runClassify);
drawOrbits();
drawCloseness();
