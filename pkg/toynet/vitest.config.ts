import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    testTimeout: 600_000,
    hookTimeout: 900_000,
    // training tests share module state deliberately; keep them serial
    fileParallelism: false,
    sequence: { concurrent: false },
  },
});
