/**
 * Icon asset set. Every icon is a small inline SVG keyed by the engine's
 * resolved_icon id; "?" is the literal fallback glyph for unmatched devices.
 * The console renders exactly the engine's icon id and never re-derives it.
 */

export interface IconAsset {
  svg: string;
  title: string;
}

const STROKE = 'fill="none" stroke="currentColor" stroke-width="1.6"';

export const ICONS: Record<string, IconAsset> = {
  "management-station": {
    title: "Management station",
    svg: `<rect x="5" y="7" width="22" height="13" rx="1.5" ${STROKE}/><line x1="11" y1="24" x2="21" y2="24" stroke="currentColor" stroke-width="1.6"/><line x1="16" y1="20" x2="16" y2="24" stroke="currentColor" stroke-width="1.6"/>`,
  },
  "router-vendorA": {
    title: "Router (vendor A)",
    svg: `<circle cx="16" cy="16" r="11" ${STROKE}/><path d="M10 13h8m-2-3 3 3-3 3M22 19h-8m2 3-3-3 3-3" ${STROKE} stroke-linecap="round"/>`,
  },
  "router-vendorB": {
    title: "Router (vendor B)",
    svg: `<rect x="5" y="10" width="22" height="12" rx="6" ${STROKE}/><path d="M10 16h4m4 0h4m-8-3v6" ${STROKE} stroke-linecap="round"/>`,
  },
  "switch-generic": {
    title: "Switch",
    svg: `<rect x="4" y="11" width="24" height="10" rx="1.5" ${STROKE}/><path d="M8 16h2m3 0h2m3 0h2m3 0h2" stroke="currentColor" stroke-width="1.8"/>`,
  },
  dslam: {
    title: "DSLAM / access node",
    svg: `<rect x="7" y="6" width="18" height="20" rx="1.5" ${STROKE}/><path d="M11 11h10M11 16h10M11 21h10" stroke="currentColor" stroke-width="1.6"/>`,
  },
  "microwave-station": {
    title: "Microwave station",
    svg: `<path d="M16 26V14m-6 12h12" ${STROKE} stroke-linecap="round"/><path d="M16 14a6 6 0 1 1 6-6" ${STROKE}/><circle cx="16" cy="14" r="1.6" fill="currentColor"/>`,
  },
  iface: {
    title: "Interface",
    svg: `<circle cx="16" cy="16" r="9" ${STROKE}/><circle cx="16" cy="16" r="2" fill="currentColor"/>`,
  },
};

export const FALLBACK_ICON_ID = "?";

/** The "?" asset: a literal interrogation-mark badge. */
export const FALLBACK_ICON: IconAsset = {
  title: "Unknown device",
  svg: `<rect x="5" y="5" width="22" height="22" rx="3" ${STROKE}/><text x="16" y="22" text-anchor="middle" font-size="15" font-weight="700" fill="currentColor">?</text>`,
};

export function iconFor(iconId: string): IconAsset {
  return ICONS[iconId] ?? FALLBACK_ICON;
}

export function iconSvg(iconId: string, size = 32): string {
  const asset = iconFor(iconId);
  return `<svg viewBox="0 0 32 32" width="${size}" height="${size}" role="img" aria-label="${asset.title}">${asset.svg}</svg>`;
}
