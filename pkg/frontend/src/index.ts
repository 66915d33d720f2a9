export { readCsv, numericColumn, SchemaError, type Table, type Row } from "./csv.js";
export { ecdf, ksTwoSample, fitLine, type Ecdf, type LineFit } from "./stats.js";
export { color, fmt, scale, SvgDoc, DEFAULT_STYLE, type Style } from "./svg.js";
export {
  FIGURE_KINDS,
  loadSpec,
  render,
  renderToString,
  decaySlope,
  type FigureKind,
  type FigureSpec,
} from "./figures.js";
export { runCli } from "./cli.js";
