// Per-panel interactive point-cloud view. Similarity judgments must be
// rotation- and translation-invariant, so each panel gets its own orbit
// controls for inspection from any angle.

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";

export function parseXyz(text: string): Float32Array {
  const coords: number[] = [];
  for (const line of text.split("\n")) {
    const t = line.trim();
    if (!t || t.startsWith("#")) continue;
    const parts = t.split(/\s+/);
    if (parts.length !== 3) continue;
    coords.push(Number(parts[0]), Number(parts[1]), Number(parts[2]));
  }
  return new Float32Array(coords);
}

export class PointCloudPanel {
  private renderer;
  private scene;
  private camera;
  private controls;
  private running = true;

  constructor(container: HTMLElement, xyzText: string, size = 220) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(size, size);
    container.appendChild(this.renderer.domElement);

    this.scene = new THREE.Scene();
    this.scene.background = new THREE.Color(0xf7fafc);
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.01, 100);
    this.camera.position.set(1.6, 1.2, 1.6);
    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.target.set(0.5, 0.5, 0.5);

    const positions = parseXyz(xyzText);
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
    const material = new THREE.PointsMaterial({ size: 0.012, color: 0x2b6cb0 });
    this.scene.add(new THREE.Points(geometry, material));

    const animate = () => {
      if (!this.running) return;
      requestAnimationFrame(animate);
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    animate();
  }

  dispose(): void {
    this.running = false;
    this.renderer.dispose();
    this.renderer.domElement.remove();
  }
}
