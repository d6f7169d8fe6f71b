import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // one CPU in CI; the acceptance file also owns a spawned service process
    fileParallelism: false,
    testTimeout: 30_000,
    hookTimeout: 120_000,
  },
});
