static int sg_common_write(Sg_fd *sfp, Sg_request *srp, unsigned char *cmnd, int timeout, int blocking)
{
    int k;
    Sg_scsi_hdr *hp = &srp->header;

    k = sg_start_req(srp, cmnd);
    if (k) {
        blk_end_request_all(srp->rq, k);
        sg_finish_rem_req(srp);
        return k;
    }
    return 0;
}

static void sg_finish_rem_req(Sg_request *srp)
{
    if (srp->rq) {
        if (srp->rq->cmd != srp->rq->__cmd)
            free(srp->rq->cmd);
    }
}
