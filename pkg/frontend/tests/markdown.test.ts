import { describe, expect, it } from "vitest";

import { formatTimestamp, renderMarkdown, stripFootnoteDefinitions } from "../src/markdown.js";
import type { Citation } from "../src/types.js";

const CITATION: Citation = {
  footnote_id: 1,
  video_file: "lecture_03.mp4",
  start_ms: 872_000,
  url: "/api/videos/lecture_03.mp4#t=872",
};

describe("renderMarkdown", () => {
  it("renders known footnote references as superscript links", () => {
    const html = renderMarkdown("Revisit recursion.[^1]", [CITATION]);
    expect(html).toContain('<sup><a href="#" class="footnote-link" data-footnote-id="1">[1]</a></sup>');
  });

  it("renders unknown footnote ids as plain text, never a control", () => {
    const html = renderMarkdown("Mystery claim.[^5]", [CITATION]);
    expect(html).toContain("[^5]");
    expect(html).not.toContain('data-footnote-id="5"');
  });

  it("strips footnote definition lines from the body", () => {
    const md = "Claim.[^1]\n\n[^1]: [lecture_03.mp4 @ 00:14:32](video://lecture_03.mp4#t=872)";
    const html = renderMarkdown(md, [CITATION]);
    expect(html).not.toContain("video://");
    expect(html).toContain("footnote-link");
  });

  it("escapes HTML in the feedback text", () => {
    const html = renderMarkdown("Avoid <script>alert(1)</script> tags", []);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("renders paragraphs, emphasis and inline code", () => {
    const html = renderMarkdown("First **bold** and `code`.\n\nSecond *em*.", []);
    expect(html).toContain("<strong>bold</strong>");
    expect(html).toContain("<code>code</code>");
    expect(html).toContain("<em>em</em>");
    expect(html.match(/<p>/g)).toHaveLength(2);
  });

  it("renders fenced code blocks verbatim", () => {
    const html = renderMarkdown("Look:\n\n```python\nprint('hi')\n```", []);
    expect(html).toContain("<pre><code>print('hi')\n</code></pre>");
  });

  it("renders headings", () => {
    expect(renderMarkdown("## Hint", [])).toContain("<h2>Hint</h2>");
  });
});

describe("stripFootnoteDefinitions", () => {
  it("removes only definition lines", () => {
    const md = "Body with ref.[^1]\n[^1]: definition line\nTrailing text";
    expect(stripFootnoteDefinitions(md)).toBe("Body with ref.[^1]\nTrailing text");
  });
});

describe("formatTimestamp", () => {
  it("formats hours, minutes and seconds", () => {
    expect(formatTimestamp(872_000)).toBe("00:14:32");
    expect(formatTimestamp(0)).toBe("00:00:00");
    expect(formatTimestamp(3_723_450)).toBe("01:02:03");
  });

  it("truncates milliseconds", () => {
    expect(formatTimestamp(872_999)).toBe("00:14:32");
  });
});
