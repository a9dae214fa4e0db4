import { ApiClient } from "./api.js";
import { AppView } from "./view.js";

const root = document.getElementById("app");
if (root) {
  const view = new AppView(document, new ApiClient(""));
  view.mount(root);
  void view.init();
}
