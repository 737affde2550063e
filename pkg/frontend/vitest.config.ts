import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globals: true,
    environment: "node",
    // the e2e file spawns the rating service and polls it over real sockets
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
