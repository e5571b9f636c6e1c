/**
 * Dashboard entry point: wires the API client and pure layout modules to
 * the DOM. Views: event landscape map (time-lapse), anomaly sunburst,
 * data-layer source toggles, what-if recall panel, word cloud.
 */
import * as d3 from "d3";

import { ApiClient, RefusionInProgress } from "./api.js";
import {
  fitProjection,
  ringCentroid,
  venueMarkers,
  zonePath,
  zoneScores,
  SOURCE_COLORS,
} from "./choropleth.js";
import { angleOf, layout } from "./sunburst.js";
import { ViewState, stateFromQuery, stateToQuery } from "./state.js";
import { cloudWords } from "./wordcloud.js";
import { RecallReadout, sliderRadii, sweepRecall } from "./whatif.js";
import { Anomaly, Meta, ZoneCollection } from "./types.js";

const api = new ApiClient("");
let state: ViewState = stateFromQuery(window.location.search.replace(/^\?/, ""));
let meta: Meta;
let zones: ZoneCollection;
let anomalies: Anomaly[] = [];
let zoneCentroids = new Map<string, [number, number]>();
let playTimer: number | null = null;
let refusing = false;

function pushState(): void {
  history.replaceState(null, "", "?" + stateToQuery(state));
}

function banner(msg: string | null): void {
  const el = document.getElementById("banner")!;
  el.textContent = msg ?? "";
  el.style.display = msg ? "block" : "none";
}

async function renderMap(): Promise<void> {
  const svg = d3.select<SVGSVGElement, unknown>("#map");
  svg.selectAll("*").remove();
  const vp = { width: 640, height: 480, pad: 16 };
  const proj = fitProjection(zones, vp);

  if (state.sources.length === 0) {
    banner("no sources enabled");
    return;
  }
  const enabledAnoms = anomalies.filter((a) => state.sources.includes(a.source));
  const align = {
    binMinutes: meta.bin_minutes,
    fineMinutes: Math.min(...Object.values(meta.bin_minutes)),
  };
  const scores = zoneScores(enabledAnoms, state.date, state.bin, align);
  const maxScore = Math.max(1e-9, ...scores.values());
  const shade = d3.scaleSequential(d3.interpolateOrRd).domain([0, maxScore]);

  svg
    .selectAll("path.zone")
    .data(zones.features)
    .join("path")
    .attr("class", "zone")
    .attr("d", (f) => zonePath(f, proj))
    .attr("fill", (f) => {
      const v = scores.get(f.properties.zone_id);
      return v === undefined ? "#f4f4f4" : shade(v);
    })
    .attr("stroke", "#999")
    .on("click", (_ev, f) => {
      state = { ...state, zone: f.properties.zone_id };
      pushState();
      void renderWordCloud();
    });

  const events = await api.events();
  for (const ev of events) {
    for (const m of venueMarkers(ev, zoneCentroids, proj)) {
      svg
        .append(m.kind === "actual" ? "rect" : "circle")
        .attr("fill", m.color)
        .attr(m.kind === "actual" ? "x" : "cx", m.x - (m.kind === "actual" ? 5 : 0))
        .attr(m.kind === "actual" ? "y" : "cy", m.y - (m.kind === "actual" ? 5 : 0))
        .attr(m.kind === "actual" ? "width" : "r", m.kind === "actual" ? 10 : 5)
        .attr("height", m.kind === "actual" ? 10 : null)
        .append("title")
        .text(`${ev.name}: ${m.label}`);
    }
  }
  const legend = d3.select("#map-legend");
  legend.selectAll("*").remove();
  for (const [name, color] of Object.entries(SOURCE_COLORS)) {
    legend
      .append("span")
      .style("color", color)
      .style("margin-right", "0.8em")
      .text(name === "ACTUAL" ? "■ actual venue" : `● ${name}`);
  }
}

function renderSunburstFrom(arcs: ReturnType<typeof layout>, total: number): void {
  const svg = d3.select<SVGSVGElement, unknown>("#sunburst");
  svg.selectAll("*").remove();
  const size = 420;
  const rings = Math.max(1, ...arcs.map((a) => a.depth));
  const ringWidth = size / 2 / (rings + 1);
  const g = svg.append("g").attr("transform", `translate(${size / 2},${size / 2})`);
  const arcGen = d3
    .arc<(typeof arcs)[number]>()
    .startAngle((a) => a.a0)
    .endAngle((a) => a.a1)
    .innerRadius((a) => a.depth * ringWidth)
    .outerRadius((a) => (a.depth + 1) * ringWidth - 1);
  const color = d3.scaleOrdinal(d3.schemeTableau10);
  g.selectAll("path")
    .data(arcs)
    .join("path")
    .attr("d", arcGen)
    .attr("fill", (a) => color(a.path[0] + a.depth))
    .append("title")
    .text((a) => `${a.path.join(" / ")}: ${a.value} anomalies (${angleOf(a).toFixed(3)} rad)`);
  d3.select("#sunburst-total").text(`${total} anomalies`);
}

async function renderSunburst(): Promise<void> {
  const burst = await api.sunburst(state.detector);
  renderSunburstFrom(layout(burst), burst.total);
}

async function renderWordCloud(): Promise<void> {
  const el = d3.select("#wordcloud");
  el.selectAll("*").remove();
  if (!state.zone || !state.date || state.bin === null) {
    el.append("span").text("select a zone, date and bin");
    return;
  }
  const ann = await api.annotations(state.zone, state.date, state.bin);
  for (const w of cloudWords(ann)) {
    el.append("span")
      .style("font-size", `${w.fontPx.toFixed(1)}px`)
      .style("margin", "0 0.4em")
      .attr("title", `tf-idf ${w.score.toFixed(3)}`)
      .text(w.term);
  }
}

const weightSliders: Record<string, number> = {};

function renderWeightControls(): void {
  const host = document.getElementById("weight-sliders")!;
  host.innerHTML = "";
  if (state.method !== "weighted") return;
  for (const source of state.sources) {
    if (!(source in weightSliders)) weightSliders[source] = 1 / state.sources.length;
    const label = document.createElement("label");
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.05";
    slider.value = String(weightSliders[source]);
    slider.oninput = () => {
      weightSliders[source] = Number(slider.value);
      void renderWhatIf();
    };
    label.appendChild(document.createTextNode(`w(${source}) `));
    label.appendChild(slider);
    host.appendChild(label);
  }
}

async function renderWhatIf(): Promise<void> {
  const readout: RecallReadout = await sweepRecall(api, state, sliderRadii(), weightSliders);
  const points = readout.curve();
  const svg = d3.select<SVGSVGElement, unknown>("#recall-curve");
  svg.selectAll("*").remove();
  const w = 420;
  const h = 200;
  const x = d3.scaleLinear([0, 4000], [30, w - 10]);
  const y = d3.scaleLinear([0, 1], [h - 20, 10]);
  const line = d3
    .line<{ r: number; recall: number }>()
    .x((p) => x(p.r))
    .y((p) => y(p.recall));
  svg.append("path").attr("d", line(points)).attr("fill", "none").attr("stroke", "#2166ac");
  svg.append("g").attr("transform", `translate(0,${h - 20})`).call(d3.axisBottom(x).ticks(5));
  svg.append("g").attr("transform", "translate(30,0)").call(d3.axisLeft(y).ticks(5));
  const at = readout.at(state.r);
  d3.select("#recall-readout").text(
    at === undefined ? "-" : `recall @ R=${state.r} m: ${(at * 100).toFixed(1)}%`,
  );
}

function bindControls(): void {
  const rSlider = document.getElementById("r-slider") as HTMLInputElement;
  rSlider.value = String(state.r);
  rSlider.oninput = () => {
    state = { ...state, r: Number(rSlider.value) };
    pushState();
    void renderWhatIf();
  };
  const sSlider = document.getElementById("s-slider") as HTMLInputElement;
  sSlider.value = String(state.s);
  sSlider.oninput = () => {
    state = { ...state, s: Number(sSlider.value) };
    pushState();
    void renderWhatIf();
  };
  const kSlider = document.getElementById("k-slider") as HTMLInputElement;
  kSlider.value = String(state.k);
  kSlider.oninput = () => {
    state = { ...state, k: Number(kSlider.value) };
    pushState();
    void renderWhatIf();
  };
  const offsetToggle = document.getElementById("offset-toggle") as HTMLInputElement;
  offsetToggle.checked = state.offset === -1;
  offsetToggle.onchange = () => {
    state = { ...state, offset: offsetToggle.checked ? -1 : 0 };
    pushState();
    void renderWhatIf();
  };
  const methodSel = document.getElementById("method-select") as HTMLSelectElement;
  methodSel.value = state.method;
  methodSel.onchange = () => {
    state = { ...state, method: methodSel.value as ViewState["method"] };
    pushState();
    renderWeightControls();
    void renderWhatIf();
  };
  renderWeightControls();

  const toggles = document.getElementById("source-toggles")!;
  toggles.innerHTML = "";
  for (const source of meta.available_sources) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = state.sources.includes(source);
    box.disabled = refusing;
    box.onchange = async () => {
      if (refusing) return;
      const next = box.checked
        ? [...state.sources, source].sort()
        : state.sources.filter((s) => s !== source);
      refusing = true;
      bindControls();
      try {
        await api.setSources(next);
        state = { ...state, sources: next };
        pushState();
        await Promise.all([renderMap(), renderWhatIf()]);
        banner(null);
      } catch (e) {
        box.checked = !box.checked;
        banner(e instanceof RefusionInProgress ? "re-fusion in progress, retry shortly" : String(e));
      } finally {
        refusing = false;
        bindControls();
      }
    };
    label.appendChild(box);
    label.appendChild(document.createTextNode(source));
    toggles.appendChild(label);
  }

  const play = document.getElementById("play-button") as HTMLButtonElement;
  play.onclick = () => {
    if (playTimer !== null) {
      window.clearInterval(playTimer);
      playTimer = null;
      play.textContent = "▶ time-lapse";
      return;
    }
    play.textContent = "■ stop";
    const binsPerDay = 1440 / Math.min(...Object.values(meta.bin_minutes));
    playTimer = window.setInterval(() => {
      const next = ((state.bin ?? 0) + 1) % binsPerDay;
      state = { ...state, bin: next, date: state.date ?? meta.date_range[0] };
      pushState();
      (document.getElementById("bin-readout") as HTMLElement).textContent = `bin ${next}`;
      void renderMap();
    }, 1000); // one bin per second
  };
}

async function boot(): Promise<void> {
  try {
    meta = await api.meta();
    zones = await api.zones();
    for (const f of zones.features) {
      zoneCentroids.set(f.properties.zone_id, ringCentroid(f.geometry.coordinates[0]));
    }
    anomalies = await api.anomalies(state.detector);
    state = { ...state, date: state.date ?? meta.date_range[1] };
    bindControls();
    await Promise.all([renderMap(), renderSunburst(), renderWhatIf(), renderWordCloud()]);
    banner(null);
  } catch (e) {
    // keep whatever rendered; surface the failure without blocking the page
    banner(`API error: ${String(e)}`);
  }
}

void boot();
