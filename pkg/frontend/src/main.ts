import { ReviewController } from './controller.js';

const root = document.getElementById('app');
if (root) {
  new ReviewController(root).start();
} else {
  console.error('review-ui: no #app element to mount on');
}
