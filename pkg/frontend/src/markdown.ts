import type { Citation } from "./types.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Drop footnote definition lines; they are rendered as the source list instead. */
export function stripFootnoteDefinitions(markdown: string): string {
  return markdown
    .split("\n")
    .filter((line) => !/^\[\^\d+\]:/.test(line))
    .join("\n")
    .trim();
}

function renderInline(text: string, known: Set<number>): string {
  let html = text;
  html = html.replace(/`([^`]+)`/g, "<code>$1</code>");
  html = html.replace(/\*\*([^*]+)\*\*/g, "<strong>$1</strong>");
  html = html.replace(/\*([^*]+)\*/g, "<em>$1</em>");
  // footnote references: a known id becomes a superscript link, an unknown
  // id stays plain text so the student never sees a dead control
  html = html.replace(/\[\^(\d+)\](?!:)/g, (match, id: string) => {
    const footnoteId = Number(id);
    if (!known.has(footnoteId)) {
      return match;
    }
    return `<sup><a href="#" class="footnote-link" data-footnote-id="${footnoteId}">[${footnoteId}]</a></sup>`;
  });
  return html;
}

/**
 * Render feedback markdown to HTML. Supports paragraphs, headings, bold,
 * italic, inline code, fenced code blocks, and footnote references.
 */
export function renderMarkdown(markdown: string, citations: Citation[]): string {
  const known = new Set(citations.map((c) => c.footnote_id));
  const source = stripFootnoteDefinitions(markdown);

  const parts: string[] = [];
  const segments = source.split(/```/);
  segments.forEach((segment, index) => {
    if (index % 2 === 1) {
      // inside a fence; first line may name the language
      const body = segment.replace(/^[a-zA-Z0-9_-]*\n/, "");
      parts.push(`<pre><code>${escapeHtml(body)}</code></pre>`);
      return;
    }
    for (const block of segment.split(/\n{2,}/)) {
      const trimmed = block.trim();
      if (!trimmed) {
        continue;
      }
      const heading = /^(#{1,3})\s+(.*)$/.exec(trimmed);
      if (heading) {
        const level = heading[1].length;
        parts.push(`<h${level}>${renderInline(escapeHtml(heading[2]), known)}</h${level}>`);
        continue;
      }
      const withBreaks = escapeHtml(trimmed).replace(/\n/g, "<br>");
      parts.push(`<p>${renderInline(withBreaks, known)}</p>`);
    }
  });
  return parts.join("\n");
}

export function formatTimestamp(startMs: number): string {
  const total = Math.floor(startMs / 1000);
  const hours = Math.floor(total / 3600);
  const minutes = Math.floor((total % 3600) / 60);
  const seconds = total % 60;
  const pad = (n: number) => String(n).padStart(2, "0");
  return `${pad(hours)}:${pad(minutes)}:${pad(seconds)}`;
}
