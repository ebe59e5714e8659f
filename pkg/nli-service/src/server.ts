import { parseArgs } from 'node:util';

import { createApp } from './app.js';
import { loadModel } from './model.js';

const { values } = parseArgs({
  options: {
    model: { type: 'string', default: process.env.NLI_MODEL ?? 'lexical' },
    host: { type: 'string', default: process.env.NLI_HOST ?? '127.0.0.1' },
    port: { type: 'string', default: process.env.NLI_PORT ?? '8500' },
    'body-limit': { type: 'string', default: '1mb' },
  },
});

const modelPromise = loadModel(values.model as string);
modelPromise.catch((err) => {
  console.error(`failed to load model: ${err}`);
  process.exitCode = 1;
});

const app = createApp(modelPromise, {
  bodyLimit: values['body-limit'] as string,
  authToken: process.env.NLI_SERVICE_TOKEN,
});

const port = Number(values.port);
app.listen(port, values.host as string, () => {
  console.log(`nli-service listening on http://${values.host}:${port} (model: ${values.model})`);
});
