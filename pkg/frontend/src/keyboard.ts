/**
 * Keyboard shortcuts for high-volume adjudication: digits 1..N select the
 * session schema's classes in schema order.
 */

import type { ClassInfo } from './types.js';

export function classForKey(key: string, classes: ClassInfo[]): ClassInfo | null {
  if (!/^[1-9]$/.test(key)) {
    return null;
  }
  const index = Number(key) - 1;
  return index < classes.length ? classes[index] : null;
}

/** "1 Background  2 Comparison ..." helper line shown under the palette. */
export function shortcutLegend(classes: ClassInfo[]): string {
  return classes
    .slice(0, 9)
    .map((cls, i) => `${i + 1} ${cls.name}`)
    .join('  ');
}
