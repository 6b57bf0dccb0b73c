// Optional transformer backend; only present when the user installs it.
declare module "@xenova/transformers";
