import { describe, expect, it } from "vitest";

import { boxPlotSvg, histogramSvg } from "../src/charts.js";
import { renderNotFound, renderResult } from "../src/result.js";
import type { AuditPayload, PlotsPayload } from "../src/types.js";
import { fixture } from "./helpers.js";

const audit = fixture<AuditPayload>("result.json");
const biased = fixture<AuditPayload>("result_biased.json");
const plots = fixture<PlotsPayload>("plots.json");

describe("result page", () => {
  it("shows the summary with every metric verbatim from the fixture", () => {
    const html = renderResult(audit, plots);
    expect(html).toContain(audit.model_id);
    expect(html).toContain(String(audit.faas));
    expect(html).toContain(String(audit.wer));
    expect(html).toContain(String(audit.overall_score));
    expect(html).toContain(audit.tier);
    for (const category of audit.categories) {
      expect(html).toContain(String(category.category_score));
      expect(html).toContain(String(category.adjusted_score));
      expect(html).toContain(String(category.lrt.p_value));
      for (const group of Object.values(category.groups)) {
        expect(html).toContain(String(group.predicted_wer));
        expect(html).toContain(String(group.raw_score));
      }
    }
  });

  it("renders one box row per demographic level with whiskers at min/max", () => {
    const html = renderResult(audit, plots);
    const genderLevels = Object.keys(plots.attributes["gender"]!.levels);
    for (const level of genderLevels) {
      expect(html).toContain(`data-level="${level}"`);
    }
    const boxRows = html.match(/class="box-row"/g) ?? [];
    const totalLevels = Object.values(plots.attributes).reduce(
      (n, attribute) => n + Object.keys(attribute.levels).length,
      0,
    );
    expect(boxRows.length).toBe(totalLevels);
  });

  it("puts a significance badge only on categories with p < 0.05", () => {
    const calm = renderResult(audit, plots);
    expect(audit.categories.every((c) => c.lrt.p_value >= 0.05)).toBe(true);
    expect(calm).not.toContain("significance-badge");

    const flagged = renderResult(biased, "missing");
    const significant = biased.categories.filter((c) => c.lrt.p_value < 0.05);
    expect(significant.length).toBeGreaterThan(0);
    const badges = flagged.match(/significance-badge/g) ?? [];
    expect(badges.length).toBe(significant.length);
  });

  it("hides charts with an explanation when per-utterance detail is gone", () => {
    const html = renderResult(audit, "no-detail");
    expect(html).toContain("charts-unavailable");
    expect(html).not.toContain("<svg");
    expect(html).toContain(String(audit.faas)); // summary still present
  });

  it("renders the not-found view for unknown models", () => {
    expect(renderNotFound("ghost/model")).toContain("no audit found for ghost/model");
  });
});

describe("charts", () => {
  it("labels the overflow histogram bar ≥2.0", () => {
    const withOverflow = {
      ...plots.histogram,
      overflow: 3,
    };
    const svg = histogramSvg(withOverflow);
    expect(svg).toContain("≥2.0");
    expect(svg).toContain(`≥2.0: 3`);
  });

  it("draws one bar per bin plus the overflow bar", () => {
    const svg = histogramSvg(plots.histogram);
    const bars = svg.match(/<rect /g) ?? [];
    expect(bars.length).toBe(plots.histogram.counts.length + 1);
  });

  it("whisker endpoints sit at the level's min and max", () => {
    const level = plots.attributes["gender"]!.levels["female"]!;
    const svg = boxPlotSvg([{ label: "female", box: level.box, count: level.count }]);
    expect(svg).toContain(`min ${String(level.box.min)}`);
    expect(svg).toContain(`max ${String(level.box.max)}`);
    expect(svg).toContain(`median ${String(level.box.median)}`);
  });

  it("keeps five-number summaries verbatim in the tooltip", () => {
    for (const [label, level] of Object.entries(plots.attributes["ethnicity"]!.levels)) {
      const svg = boxPlotSvg([{ label, box: level.box, count: level.count }]);
      for (const value of [level.box.min, level.box.q1, level.box.median, level.box.q3, level.box.max]) {
        expect(svg).toContain(String(value));
      }
    }
  });
});
