// Detection overlay: class-colored boxes drawn over the image at display
// scale, with per-class visibility toggles and hover details.

import type { BoxDetection, ClassName } from "./types.js";

export const CLASS_COLORS: Record<ClassName, string> = {
  wildfire: "#d32f2f",
  smoke: "#808080",
};

export function scaleBox(
  box: [number, number, number, number],
  scale: number,
): [number, number, number, number] {
  return [box[0] * scale, box[1] * scale, box[2] * scale, box[3] * scale];
}

export interface OverlayOptions {
  imageUrl?: string;
  imageWidth: number;
  imageHeight: number;
  scale: number;
}

export function renderOverlay(
  container: HTMLElement,
  detections: BoxDetection[],
  options: OverlayOptions,
): void {
  container.innerHTML = "";
  container.classList.add("overlay-view");

  const visible = new Set<ClassName>(["wildfire", "smoke"]);

  const toggles = document.createElement("div");
  toggles.className = "overlay-toggles";
  for (const cls of ["wildfire", "smoke"] as ClassName[]) {
    const label = document.createElement("label");
    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.checked = true;
    checkbox.dataset.classToggle = cls;
    checkbox.addEventListener("change", () => {
      if (checkbox.checked) visible.add(cls);
      else visible.delete(cls);
      drawBoxes();
    });
    label.append(checkbox, ` ${cls}`);
    toggles.appendChild(label);
  }

  const stage = document.createElement("div");
  stage.className = "overlay-stage";
  stage.style.position = "relative";
  stage.style.width = `${options.imageWidth * options.scale}px`;
  stage.style.height = `${options.imageHeight * options.scale}px`;

  if (options.imageUrl) {
    const img = document.createElement("img");
    img.src = options.imageUrl;
    img.alt = "scene";
    img.style.width = "100%";
    img.style.height = "100%";
    stage.appendChild(img);
  }

  const hoverInfo = document.createElement("div");
  hoverInfo.className = "overlay-hover";
  hoverInfo.textContent = "";

  const boxLayer = document.createElement("div");
  boxLayer.className = "overlay-boxes";
  stage.appendChild(boxLayer);

  function drawBoxes(): void {
    boxLayer.innerHTML = "";
    for (const det of detections) {
      if (!visible.has(det.class)) continue;
      const [x0, y0, x1, y1] = scaleBox(det.box, options.scale);
      const el = document.createElement("div");
      el.className = `det-box det-${det.class}`;
      el.style.position = "absolute";
      el.style.left = `${x0}px`;
      el.style.top = `${y0}px`;
      el.style.width = `${x1 - x0}px`;
      el.style.height = `${y1 - y0}px`;
      el.style.border = `2px solid ${CLASS_COLORS[det.class]}`;
      el.dataset.class = det.class;
      el.dataset.confidence = String(det.confidence);
      el.dataset.box = det.box.join(",");

      const tag = document.createElement("span");
      tag.className = "det-label";
      tag.style.background = CLASS_COLORS[det.class];
      tag.textContent = `${det.class} ${(det.confidence * 100).toFixed(1)}%`;
      el.appendChild(tag);

      el.addEventListener("mouseenter", () => {
        hoverInfo.textContent =
          `${det.class} conf=${det.confidence} ` +
          `box=(${det.box[0]}, ${det.box[1]}, ${det.box[2]}, ${det.box[3]})`;
      });
      el.addEventListener("mouseleave", () => {
        hoverInfo.textContent = "";
      });
      boxLayer.appendChild(el);
    }
  }

  drawBoxes();

  container.appendChild(toggles);
  container.appendChild(stage);
  container.appendChild(hoverInfo);

  if (detections.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "no detections";
    container.appendChild(empty);
  }
}
