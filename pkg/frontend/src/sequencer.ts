// Monotone request tokens. Each user action takes a fresh token before it
// fires; a response only lands if its token is still the newest, so a slow
// older reply can never overwrite a newer one.

export class RequestSequencer {
  private latest = 0;

  begin(): number {
    this.latest += 1;
    return this.latest;
  }

  isCurrent(token: number): boolean {
    return token === this.latest;
  }
}
