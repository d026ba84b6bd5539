/** Client-side validation for the configuration form (pre-POST). */

export function validateOid(text: string): string | null {
  const trimmed = text.trim();
  if (!trimmed) return "OID is required";
  if (!/^\d+(\.\d+)+$/.test(trimmed)) {
    return `malformed OID "${trimmed}" (dotted non-negative integers)`;
  }
  const arcs = trimmed.split(".").map(Number);
  if (arcs.length < 2) return "OID needs at least two arcs";
  if (arcs[0] > 2) return "first OID arc must be 0..2";
  if (arcs[0] < 2 && arcs[1] > 39) return "second arc must be <= 39 under roots 0 and 1";
  return null;
}

export function validateValue(type: string, raw: string): string | null {
  if (!raw.trim() && type !== "Null") return "value is required";
  if (type === "Integer") {
    if (!/^-?\d+$/.test(raw.trim())) return `"${raw}" is not an integer`;
  }
  if (type === "IpAddress") {
    const parts = raw.trim().split(".");
    if (parts.length !== 4 || parts.some((p) => !/^\d+$/.test(p) || Number(p) > 255)) {
      return `"${raw}" is not an IPv4 address`;
    }
  }
  return null;
}

export function buildValue(type: string, raw: string): { type: string; value: unknown } {
  if (type === "Integer") return { type, value: Number(raw.trim()) };
  return { type, value: raw };
}
