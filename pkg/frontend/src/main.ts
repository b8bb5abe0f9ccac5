import { ApiClient } from "./api.js";
import { AnnotationController, View } from "./controller.js";
import { PointCloudPanel } from "./viewer.js";

const app = document.getElementById("app") as HTMLElement;
let panels: PointCloudPanel[] = [];

function clearPanels(): void {
  for (const p of panels) p.dispose();
  panels = [];
}

function tokenFromSession(): string {
  // token kept for the session only, never persisted
  let token = sessionStorage.getItem("annotator-token");
  if (!token) {
    token = window.prompt("Annotator token:") ?? "";
    sessionStorage.setItem("annotator-token", token);
  }
  return token;
}

const api = new ApiClient("", tokenFromSession());
const controller = new AnnotationController(api);

async function render(view: View): Promise<void> {
  clearPanels();
  app.replaceChildren();

  if (view.kind === "loading") {
    app.textContent = "Loading…";
    return;
  }
  if (view.kind === "done") {
    const done = document.createElement("h2");
    done.textContent = "All clusters annotated. Thank you!";
    app.appendChild(done);
    return;
  }
  if (view.kind === "error") {
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = view.message;
    const retry = document.createElement("button");
    retry.textContent = "Retry";
    retry.onclick = () => controller.loadNext();
    app.append(banner, retry);
    return;
  }

  const header = document.createElement("h2");
  header.textContent = `Cluster ${view.task.cluster_id} — round ${view.task.round + 1}`;
  app.appendChild(header);

  const hint = document.createElement("p");
  hint.textContent =
    "Uncheck the models that are dissimilar from the checked ones, then submit.";
  app.appendChild(hint);

  if (view.error) {
    const err = document.createElement("div");
    err.className = "error-banner";
    err.textContent = view.error;
    app.appendChild(err);
  }

  const grid = document.createElement("div");
  grid.className = "grid";
  app.appendChild(grid);

  for (const modelId of view.task.remaining) {
    const cell = document.createElement("div");
    cell.className = "cell";
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = view.checked.has(modelId);
    box.dataset.model = modelId;
    box.onchange = () => controller.toggle(modelId);
    label.append(box, document.createTextNode(` ${modelId}`));
    cell.appendChild(label);
    grid.appendChild(cell);

    api
      .fetchPreview(`/api/preview/${modelId}.xyz`)
      .then((xyz) => {
        panels.push(new PointCloudPanel(cell, xyz));
      })
      .catch(() => {
        const missing = document.createElement("div");
        missing.textContent = "(no preview)";
        cell.appendChild(missing);
      });
  }

  const submit = document.createElement("button");
  submit.textContent = "Submit checked as similar";
  submit.onclick = () => controller.submit();
  const none = document.createElement("button");
  none.textContent = "None similar";
  none.onclick = () => controller.submitNoneSimilar();
  const bar = document.createElement("div");
  bar.className = "actions";
  bar.append(submit, none);
  app.appendChild(bar);
}

controller.onChange((view) => void render(view));
controller.loadNext();
