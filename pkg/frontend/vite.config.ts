import { defineConfig } from 'vite';

export default defineConfig({
  base: './',
  server: {
    proxy: {
      // dev mode talks to a locally running `chargeplan serve`
      '/api': 'http://127.0.0.1:8080',
    },
  },
  test: {
    environment: 'jsdom',
  },
});
