/**
 * Sandboxed rendering of stored result pages.
 *
 * Jurors judge archived copies, and those copies are hostile input: they
 * may carry scripts and third-party subresources. The frame gets an empty
 * sandbox token list (no scripts, no same-origin, no forms, no popups)
 * and no referrer; the snapshot endpoint additionally serves a deny-all
 * Content-Security-Policy, so even user agents with lax sandbox handling
 * never make external loads that could leak the study to third parties.
 */

export function createSnapshotFrame(snapshotUrl: string): HTMLIFrameElement {
  const frame = document.createElement('iframe');
  frame.setAttribute('sandbox', '');
  frame.setAttribute('referrerpolicy', 'no-referrer');
  frame.setAttribute('loading', 'eager');
  frame.className = 'snapshot-frame';
  frame.src = snapshotUrl;
  return frame;
}

/** Placeholder for results whose page could not be crawled. */
export function createUnavailableNotice(doc: Document = document): HTMLElement {
  const notice = doc.createElement('div');
  notice.className = 'snapshot-unavailable';
  notice.textContent =
    'This result could not be displayed (the page was not crawled successfully). ' +
    'You may skip it.';
  return notice;
}
