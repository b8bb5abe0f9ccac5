// Shorthand ambient declarations: the sandbox image ships three.js
// without its separate type package, so these imports type as `any`.
declare module "three";
declare module "three/examples/jsm/controls/OrbitControls.js";
