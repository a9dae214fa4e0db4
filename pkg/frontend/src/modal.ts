import { STRINGS } from "./strings.js";

/**
 * Overlay with a seekable video element. Opening it seeks to the cited
 * timestamp; the element stays mounted so tests can observe playback state.
 */
export class VideoModal {
  readonly root: HTMLDivElement;
  readonly video: HTMLVideoElement;
  private readonly caption: HTMLParagraphElement;

  constructor(doc: Document) {
    this.root = doc.createElement("div");
    this.root.className = "video-modal";
    this.root.hidden = true;

    const box = doc.createElement("div");
    box.className = "video-modal-box";

    this.video = doc.createElement("video");
    this.video.controls = true;
    this.video.preload = "metadata";

    this.caption = doc.createElement("p");
    this.caption.className = "video-modal-caption";

    const close = doc.createElement("button");
    close.type = "button";
    close.className = "video-modal-close";
    close.textContent = STRINGS.closeModal;
    close.addEventListener("click", () => this.close());

    box.append(close, this.video, this.caption);
    this.root.append(box);
  }

  get isOpen(): boolean {
    return !this.root.hidden;
  }

  open(url: string, startSeconds: number, label: string): void {
    this.root.hidden = false;
    this.caption.textContent = label;
    this.video.src = url;
    this.seek(startSeconds);
    // autoplay is best-effort; jsdom and strict browsers may refuse
    const playing = this.video.play?.();
    if (playing && typeof playing.catch === "function") {
      playing.catch(() => {});
    }
    this.video.addEventListener("loadedmetadata", () => this.seek(startSeconds), { once: true });
  }

  private seek(startSeconds: number): void {
    try {
      this.video.currentTime = startSeconds;
    } catch {
      /* media not ready yet; the loadedmetadata hook retries */
    }
  }

  close(): void {
    this.root.hidden = true;
    this.video.pause?.();
    this.video.removeAttribute("src");
  }
}
