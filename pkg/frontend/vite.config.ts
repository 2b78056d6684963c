import { defineConfig } from "vite";

export default defineConfig({
  // served by the quantrisk service at /, so keep asset URLs relative
  base: "./",
  build: { outDir: "dist" },
  server: {
    port: 5173,
    proxy: { "/api": "http://127.0.0.1:8787" },
  },
  test: {
    environment: "node",
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
