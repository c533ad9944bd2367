export * from "./types.js";
export * from "./api.js";
export * from "./reader.js";
export * from "./authoring.js";
export * from "./events.js";
