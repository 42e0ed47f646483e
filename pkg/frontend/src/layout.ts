// Deterministic graph layout: nodes sit on an ellipse in dump order, the
// initial state at twelve o'clock. No physics, so renders diff stably.

export interface Point {
  x: number;
  y: number;
}

export const PANEL_WIDTH = 360;
export const PANEL_HEIGHT = 260;

export function circleLayout(names: string[], width = PANEL_WIDTH, height = PANEL_HEIGHT): Map<string, Point> {
  const cx = width / 2;
  const cy = height / 2;
  const rx = width / 2 - 52;
  const ry = height / 2 - 36;
  const points = new Map<string, Point>();
  names.forEach((name, i) => {
    const angle = -Math.PI / 2 + (2 * Math.PI * i) / names.length;
    points.set(name, {
      x: Math.round(cx + rx * Math.cos(angle)),
      y: Math.round(cy + ry * Math.sin(angle)),
    });
  });
  return points;
}
