/**
 * Key bindings derive from the label set the server reports for the
 * session, so the client never hardcodes task names: one lowercase
 * initial per label, digits when initials collide.
 */

export interface LabelBinding {
  key: string;
  label: string;
  text: string;
}

// Label values are wire identifiers; a few read better with a space.
const DISPLAY_NAMES: Record<string, string> = {
  NoError: "No error",
};

export function bindingsFor(labels: readonly string[]): LabelBinding[] {
  const bindings: LabelBinding[] = [];
  const used = new Set<string>();
  for (const label of labels) {
    let key = label.slice(0, 1).toLowerCase();
    if (!key || used.has(key)) {
      key = String(bindings.length + 1);
    }
    used.add(key);
    bindings.push({ key, label, text: DISPLAY_NAMES[label] ?? label });
  }
  return bindings;
}
