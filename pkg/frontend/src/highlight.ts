/**
 * Inline span highlighting over the exact submitted response text.
 *
 * Server offsets count unicode scalar values; JS strings index UTF-16 code
 * units, so offsets are remapped through the code-point sequence before
 * slicing. Each highlighted span becomes a <mark> carrying its comment as
 * a hover tooltip.
 */

import type { SpanAnnotation } from "./api.js";

/** Map a scalar-value offset to the corresponding UTF-16 index. */
export function scalarToUtf16Index(text: string, scalarOffset: number): number {
  let utf16 = 0;
  let scalars = 0;
  for (const ch of text) {
    if (scalars === scalarOffset) return utf16;
    utf16 += ch.length;
    scalars += 1;
  }
  if (scalars === scalarOffset) return utf16;
  throw new RangeError(`scalar offset ${scalarOffset} past end of text`);
}

export function sliceByScalars(text: string, start: number, end: number): string {
  return text.slice(scalarToUtf16Index(text, start), scalarToUtf16Index(text, end));
}

/**
 * Build a fragment of the response text with spans wrapped in <mark>
 * elements. Spans are rendered in offset order; overlaps keep the earlier
 * span and drop the overlapping tail of later ones.
 */
export function renderAnnotated(
  text: string,
  spans: SpanAnnotation[],
  doc: Document = document,
): DocumentFragment {
  const fragment = doc.createDocumentFragment();
  const ordered = [...spans].sort((a, b) => a.start - b.start || a.end - b.end);
  let cursor = 0; // scalar offset
  for (const span of ordered) {
    if (span.start < cursor) continue;
    if (span.start > cursor) {
      fragment.appendChild(
        doc.createTextNode(sliceByScalars(text, cursor, span.start)),
      );
    }
    const mark = doc.createElement("mark");
    mark.className = "ft-span";
    mark.textContent = sliceByScalars(text, span.start, span.end);
    mark.title = span.comment;
    mark.dataset.comment = span.comment;
    fragment.appendChild(mark);
    cursor = span.end;
  }
  const total = [...text].length;
  if (cursor < total) {
    fragment.appendChild(doc.createTextNode(sliceByScalars(text, cursor, total)));
  }
  return fragment;
}
