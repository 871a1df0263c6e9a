/**
 * Browser entry point. The API origin defaults to the page's own origin,
 * which is what serve.mjs provides (static files and API behind one origin);
 * ?api=http://host:port overrides it for ad-hoc setups.
 */

import { PondClient } from './api.js';
import { GameController } from './game.js';
import { PondView } from './ui.js';

const params = new URLSearchParams(window.location.search);
const client = new PondClient({ baseUrl: params.get('api') ?? '' });
const controller = new GameController({ client });

const root = document.querySelector<HTMLElement>('#app');
if (root === null) throw new Error('missing #app element');
new PondView(root, controller);

setInterval(() => controller.tick(), 1000);
