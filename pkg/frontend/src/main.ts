/** Entry point: pick the page from the URL. `?question=<id>` mounts the
 * student page, anything else the instructor dashboard. */

import { ApiClient } from "./api.js";
import { mountInstructorPage } from "./instructor.js";
import { mountStudentPage } from "./student.js";

export function boot(root: HTMLElement, locationSearch: string): void {
  const params = new URLSearchParams(locationSearch);
  const questionId = params.get("question");
  const client = new ApiClient("");
  if (questionId) {
    void mountStudentPage(root, client, questionId);
  } else {
    mountInstructorPage(root, client);
  }
}

const rootEl = document.getElementById("freetext-root");
if (rootEl) boot(rootEl, window.location.search);
