/**
 * Draft persistence: wizard snapshots survive a page reload and clear on
 * successful submit. The backing store is injectable so tests (and non-DOM
 * hosts) can pass a plain map instead of window.localStorage.
 */
import { WizardSnapshot } from "./wizard.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const DRAFT_KEY = "railsafe-ui.draft";

export class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
  removeItem(key: string): void {
    this.data.delete(key);
  }
}

export class DraftStore {
  constructor(private readonly backing: KeyValueStore) {}

  save(snapshot: WizardSnapshot): void {
    this.backing.setItem(DRAFT_KEY, JSON.stringify(snapshot));
  }

  load(): WizardSnapshot | null {
    const raw = this.backing.getItem(DRAFT_KEY);
    if (raw === null) return null;
    try {
      return JSON.parse(raw) as WizardSnapshot;
    } catch {
      // a corrupt draft is worth less than a clean start
      this.backing.removeItem(DRAFT_KEY);
      return null;
    }
  }

  clear(): void {
    this.backing.removeItem(DRAFT_KEY);
  }
}
